// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/core.hpp"

#include <cmath>
#include <sstream>

namespace mpxd {

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

constexpr double transversality_tol = 1e-12;

}  // namespace

UnitsContext::UnitsContext(double alpha_, double volume_) : alpha(alpha_), volume(volume_) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("UnitsContext: alpha must be > 0");
    if (!(volume > 0.0) || !std::isfinite(volume)) throw Error("UnitsContext: volume must be > 0");
}

double UnitsContext::c_tilde() const { return 2.0 * M_PI / (volume * alpha * alpha); }

double UnitsContext::signal_prefactor(int n) const {
    const double ct = c_tilde();
    const double a2 = alpha * alpha;
    return std::pow(ct * ct * a2 * a2, n);
}

SpaceTimePoint::SpaceTimePoint(const Vec3& r_, double t_) : r(r_), t(t_) {
    if (!finite(r) || !std::isfinite(t)) throw Error("SpaceTimePoint: non-finite component");
}

const char* to_string(Role role) {
    switch (role) {
        case Role::pump: return "pump";
        case Role::scattered: return "scattered";
        case Role::detector: return "detector";
    }
    return "?";
}

const char* to_string(Branch branch) {
    switch (branch) {
        case Branch::primed: return "primed";
        case Branch::doubleprimed: return "doubleprimed";
        case Branch::detection: return "detection";
    }
    return "?";
}

Vec3 polarization_basis(const Vec3& k, int mu) {
    const double norm = k.norm();
    if (!(norm > 0.0)) throw Error("polarization_basis: zero wavevector");
    if (mu != 0 && mu != 1) throw Error("polarization_basis: mu must be 0 or 1");
    const Vec3 khat = k / norm;
    const Vec3 ref = std::abs(khat.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 e0 = (ref - ref.dot(khat) * khat).normalized();
    if (mu == 0) return e0;
    return khat.cross(e0);
}

Mode::Mode(const Vec3& k, int mu, Role role, double alpha)
    : Mode(k, polarization_basis(k, mu).cast<cplx>(), mu, role, alpha) {}

Mode::Mode(const Vec3& k, const CVec3& eps, int mu, Role role, double alpha)
    : k_(k), mu_(mu), eps_(eps), omega_(0.0), role_(role) {
    if (!finite(k)) throw Error("Mode: non-finite wavevector");
    if (!(k.norm() > 0.0)) throw Error("Mode: zero wavevector");
    if (mu != 0 && mu != 1) throw Error("Mode: polarization index must be 0 or 1");
    if (!(alpha > 0.0)) throw Error("Mode: alpha must be > 0");
    const cplx ek = eps.dot(k.cast<cplx>());  // conjugates eps; same magnitude test
    if (std::abs(ek) > transversality_tol) {
        std::ostringstream os;
        os << "Mode: polarization not transverse (|eps·k| = " << std::abs(ek) << ")";
        throw Error(os.str());
    }
    if (std::abs(eps.norm() - 1.0) > 1e-12) throw Error("Mode: polarization not normalized");
    omega_ = k.norm() / alpha;
}

Mode Mode::with_role(Role role) const {
    Mode m = *this;
    m.role_ = role;
    return m;
}

bool Mode::same_mode(const Mode& other, double tol) const {
    if (mu_ != other.mu_) return false;
    const double scale = std::max(k_.norm(), other.k_.norm());
    return (k_ - other.k_).norm() <= tol * scale;
}

Mode mode_from_direction(const Vec3& direction, double energy_hartree, int mu, Role role,
                         double alpha) {
    if (!(direction.norm() > 0.0)) throw Error("mode_from_direction: zero direction");
    if (!(energy_hartree > 0.0)) throw Error("mode_from_direction: energy must be > 0");
    return Mode(direction.normalized() * energy_hartree * alpha, mu, role, alpha);
}

TransferKinematics make_transfer(const Mode& pump, const Mode& scattered, double elastic_tol) {
    TransferKinematics q;
    q.q_tilde = pump.k() - scattered.k();
    q.omega_tilde = pump.omega() - scattered.omega();
    q.elastic = std::abs(q.omega_tilde) < elastic_tol;
    return q;
}

cplx phase_factor(const TransferKinematics& q, const SpaceTimePoint& x, Branch branch) {
    const double arg = -q.q_tilde.dot(x.r) + q.omega_tilde * x.t;
    switch (branch) {
        case Branch::primed: return std::polar(1.0, arg);
        case Branch::doubleprimed: return std::polar(1.0, -arg);
        case Branch::detection: break;
    }
    throw Error("phase_factor: detection points carry no transfer phase");
}

VertexConfiguration::VertexConfiguration(std::vector<SpaceTimePoint> p,
                                         std::vector<SpaceTimePoint> pp,
                                         std::vector<SpaceTimePoint> d)
    : primed(std::move(p)), doubleprimed(std::move(pp)), detection(std::move(d)) {
    validate();
}

void VertexConfiguration::validate() const {
    if (primed.size() != doubleprimed.size())
        throw Error("VertexConfiguration: primed/double-primed length mismatch");
    if (!detection.empty() && detection.size() != primed.size())
        throw Error("VertexConfiguration: detection length mismatch");
}

}  // namespace mpxd
