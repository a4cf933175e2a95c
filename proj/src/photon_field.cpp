// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/photon_field.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numeric>

namespace mpxd {

const char* to_string(FieldVariant v) {
    switch (v) {
        case FieldVariant::coherent: return "coherent";
        case FieldVariant::gaussian_schell: return "gaussian-schell";
        case FieldVariant::thermal: return "thermal";
    }
    return "?";
}

FieldVariant parse_field_variant(const std::string& text) {
    if (text == "coherent" || text == "coherent-plane-wave") return FieldVariant::coherent;
    if (text == "gaussian-schell" || text == "gaussian_schell") return FieldVariant::gaussian_schell;
    if (text == "thermal" || text == "thermal-stationary") return FieldVariant::thermal;
    throw Error("unknown field variant '" + text +
                "' (expected coherent, gaussian-schell or thermal)");
}

PulseEnvelope::PulseEnvelope(double tau0_, double t_center_, const Vec3& r0_)
    : tau0(tau0_), t_center(t_center_), r0(r0_) {
    if (!(tau0 > 0.0) || !std::isfinite(tau0)) throw Error("PulseEnvelope: tau0 must be > 0");
    if (!std::isfinite(t_center) || !r0.allFinite()) throw Error("PulseEnvelope: non-finite centre");
}

double PulseEnvelope::gamma0() const { return 2.0 * std::log(2.0) / (tau0 * tau0); }

double PulseEnvelope::operator()(double t) const {
    const double dt = t - t_center;
    return std::exp(-2.0 * gamma0() * dt * dt);
}

double PulseEnvelope::amplitude_sigma() const { return 1.0 / std::sqrt(4.0 * gamma0()); }

FieldModel::FieldModel(FieldVariant v, double e0_, Mode carrier_, PulseEnvelope env, double xi_t_,
                       double tau_c_)
    : variant(v), e0(e0_), carrier(std::move(carrier_)), xi_t(xi_t_), tau_c(tau_c_),
      envelope(env) {
    if (!(e0 >= 0.0) || !std::isfinite(e0)) throw Error("FieldModel: e0 must be >= 0");
    if (variant == FieldVariant::gaussian_schell) {
        if (!(xi_t > 0.0)) throw Error("FieldModel: xi_t must be > 0");
        if (!(tau_c > 0.0)) throw Error("FieldModel: tau_c must be > 0");
    }
}

double FieldModel::gamma_effective() const {
    switch (variant) {
        case FieldVariant::coherent: return envelope.gamma0();
        case FieldVariant::gaussian_schell: return envelope.gamma0() + 0.5 / (tau_c * tau_c);
        case FieldVariant::thermal: break;
    }
    throw Error("gamma_effective: stationary thermal light has no pulse kernel");
}

cplx coherent_amplitude(const FieldModel& model, const SpaceTimePoint& x) {
    const Mode& m = model.carrier;
    const double phase = m.k().dot(x.r) - m.omega() * x.t;
    return std::polar(model.e0 * model.envelope(x.t), phase);
}

cplx dp1(const FieldModel& model, const SpaceTimePoint& x1, const SpaceTimePoint& x2) {
    switch (model.variant) {
        case FieldVariant::coherent:
            return std::conj(coherent_amplitude(model, x1)) * coherent_amplitude(model, x2);
        case FieldVariant::gaussian_schell: {
            const double dr2 = (x1.r - x2.r).squaredNorm();
            const double dt = x1.t - x2.t;
            const double decay = std::exp(-dr2 / (2.0 * model.xi_t * model.xi_t) -
                                          dt * dt / (2.0 * model.tau_c * model.tau_c));
            return std::conj(coherent_amplitude(model, x1)) * coherent_amplitude(model, x2) * decay;
        }
        case FieldVariant::thermal: {
            const Mode& m = model.carrier;
            const double phase = m.k().dot(x2.r - x1.r) - m.omega() * (x2.t - x1.t);
            return std::polar(model.e0 * model.e0, phase);
        }
    }
    return {};
}

cplx dp_n_factorized(const FieldModel& model, const VertexConfiguration& v, const PairingSet& w) {
    v.validate();
    const int n = v.order();
    if (w.cls != PairingClass::W) throw Error("dp_n_factorized: pairing set is not class W");
    if (w.order_n != n) throw Error("dp_n_factorized: pairing order does not match vertices");
    cplx total = 0.0;
    for (const auto& p : w.pairings) {
        const auto partner = field_partner(p, n);
        cplx term = 1.0;
        for (int j = 0; j < n; ++j) term *= dp1(model, v.primed[j], v.doubleprimed[partner[j]]);
        total += term;
    }
    return total;
}

cplx dp_n_exact(const FieldModel& model, const VertexConfiguration& v) {
    v.validate();
    const int n = v.order();
    if (model.variant == FieldVariant::coherent) {
        cplx term = 1.0;
        for (int j = 0; j < n; ++j) {
            term *= std::conj(coherent_amplitude(model, v.primed[j]));
            term *= coherent_amplitude(model, v.doubleprimed[j]);
        }
        return term;
    }
    // Permanent of M_{ij} = dp1(x_i', x_j'') by explicit permutation sum.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    cplx total = 0.0;
    do {
        cplx term = 1.0;
        for (int j = 0; j < n; ++j) term *= dp1(model, v.primed[j], v.doubleprimed[perm[j]]);
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

double intensity(const FieldModel& model, const Vec3& r0, double tau_bar, double t_bar) {
    const SpaceTimePoint x1(r0, t_bar - 0.5 * tau_bar);
    const SpaceTimePoint x2(r0, t_bar + 0.5 * tau_bar);
    const cplx carrier = std::polar(1.0, model.carrier.omega() * tau_bar);
    return (dp1(model, x1, x2) * carrier).real();
}

double pulse_f1(const FieldModel& model, double t_bar) {
    const double dt = t_bar - model.envelope.t_center;
    return model.e0 * model.e0 * std::exp(-4.0 * model.envelope.gamma0() * dt * dt);
}

double pulse_fluence(const FieldModel& model) {
    return model.e0 * model.e0 * std::sqrt(M_PI / (4.0 * model.envelope.gamma0()));
}

double pulse_kernel_transform_numeric(double omega_tilde, double gamma) {
    if (!(gamma > 0.0)) throw Error("pulse_kernel_transform_numeric: gamma must be > 0");
    // u = √Γ τ; the integrand is even so only the cosine part survives.
    const double s = std::sqrt(gamma);
    const double w = omega_tilde / s;
    auto f = [w](double u) { return std::exp(-u * u) * std::cos(w * u); };
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    const double half = gauss_kronrod<double, 61>::integrate(f, 0.0, 12.0, 15, 1e-15, &err);
    return 2.0 * half / s;
}

double pulse_kernel_transform_analytic(double omega_tilde, double gamma) {
    return std::sqrt(M_PI / gamma) * std::exp(-omega_tilde * omega_tilde / (4.0 * gamma));
}

double pulse_kernel_transform_printed(double omega_tilde, double gamma) {
    return std::sqrt(M_PI / gamma) * std::exp(-omega_tilde * omega_tilde / gamma);
}

}  // namespace mpxd
