// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file core.hpp
 * @brief Units, photon modes, space-time points and momentum-transfer kinematics.
 *
 * Everything is expressed in Hartree atomic units: lengths in bohr, times in
 * ħ/E_h, frequencies and energies in Hartree. A photon of frequency ω has
 * |k| = ω·α.
 */

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpxd {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

/// Library error. Thrown for precondition and validation failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace units {
inline constexpr double alpha = 7.2973525693e-3;      // fine-structure constant
inline constexpr double hartree_ev = 27.211386245988;  // eV per Hartree
inline constexpr double fs_au = 41.341373335;          // atomic time units per fs
inline constexpr double bohr_angstrom = 0.529177210903;

inline double kev_to_hartree(double kev) { return kev * 1e3 / hartree_ev; }
inline double hartree_to_kev(double ha) { return ha * hartree_ev * 1e-3; }
inline double fs_to_au(double fs) { return fs * fs_au; }
}  // namespace units

/// Fine-structure constant and mode volume. c̃ = 2π/(Vα²).
struct UnitsContext {
    double alpha = units::alpha;
    double volume = 1.0;  // bohr³

    UnitsContext() = default;
    UnitsContext(double alpha_, double volume_);

    double c_tilde() const;
    /// Raw-signal prefactor (c̃²α⁴)ⁿ applied once at signal assembly.
    double signal_prefactor(int n) const;
};

struct SpaceTimePoint {
    Vec3 r = Vec3::Zero();
    double t = 0.0;

    SpaceTimePoint() = default;
    SpaceTimePoint(const Vec3& r_, double t_);
};

enum class Role { pump, scattered, detector };

const char* to_string(Role role);

/// Plane-wave photon mode with one of two transverse polarizations.
class Mode {
public:
    /// Builds the mode with the canonical polarization basis vector `mu`.
    Mode(const Vec3& k, int mu, Role role, double alpha = units::alpha);
    /// Explicit polarization; rejected unless transverse and normalized.
    Mode(const Vec3& k, const CVec3& eps, int mu, Role role, double alpha = units::alpha);

    const Vec3& k() const { return k_; }
    int mu() const { return mu_; }
    const CVec3& eps() const { return eps_; }
    double omega() const { return omega_; }
    Role role() const { return role_; }

    Mode with_role(Role role) const;

    /// Same wavevector (to `tol`, relative to |k|) and same polarization index.
    bool same_mode(const Mode& other, double tol = 1e-9) const;

private:
    Vec3 k_;
    int mu_;
    CVec3 eps_;
    double omega_;
    Role role_;
};

/// Canonical transverse basis vector for wavevector k; mu ∈ {0, 1}.
///
/// e0 is the projection of a reference axis (ẑ, or x̂ when k is within ~25° of
/// ẑ) orthogonal to k; e1 = k̂ × e0. For k ∥ ẑ this gives e0 = x̂, e1 = ŷ.
Vec3 polarization_basis(const Vec3& k, int mu);

/// Mode travelling along `direction` with photon energy `energy_hartree`.
Mode mode_from_direction(const Vec3& direction, double energy_hartree, int mu, Role role,
                         double alpha = units::alpha);

struct TransferKinematics {
    Vec3 q_tilde = Vec3::Zero();  // k_p − k_s
    double omega_tilde = 0.0;     // ω_p − ω_s
    bool elastic = true;
};

inline constexpr double default_elastic_tol = 1e-9;

TransferKinematics make_transfer(const Mode& pump, const Mode& scattered,
                                 double elastic_tol = default_elastic_tol);

enum class Branch { primed, doubleprimed, detection };

const char* to_string(Branch branch);

/// e^{−i q̃·r + i ω̃ t} on the primed branch, its conjugate on the double-primed one.
cplx phase_factor(const TransferKinematics& q, const SpaceTimePoint& x, Branch branch);

/// Scattering vertices of an n-photon event plus the n detection points.
struct VertexConfiguration {
    std::vector<SpaceTimePoint> primed;
    std::vector<SpaceTimePoint> doubleprimed;
    std::vector<SpaceTimePoint> detection;

    VertexConfiguration() = default;
    VertexConfiguration(std::vector<SpaceTimePoint> p, std::vector<SpaceTimePoint> pp,
                        std::vector<SpaceTimePoint> d = {});

    int order() const { return static_cast<int>(primed.size()); }
    /// Throws unless both scattering branches have n points and detection is empty or n.
    void validate() const;
};

}  // namespace mpxd
