// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file matter.hpp
 * @brief Static electron-density models, two-point density correlators and their
 *        n-point assembly over density pairings.
 */

#pragma once

#include "mpxd/combinatorics.hpp"
#include "mpxd/core.hpp"

#include <string>
#include <vector>

namespace mpxd {

enum class MatterVariant { point_scatterers, gaussian_blobs };

const char* to_string(MatterVariant v);
MatterVariant parse_matter_variant(const std::string& text);

struct DensityCenter {
    Vec3 position = Vec3::Zero();  // bohr
    double weight = 1.0;           // electrons
    double width = 0.0;            // bohr, blobs only
};

inline constexpr double default_point_width = 0.05;  // bohr

struct MatterModel {
    MatterVariant variant = MatterVariant::point_scatterers;
    std::vector<DensityCenter> centers;
    double fluct_amplitude = 0.0;
    double xi = 1.0;       // bohr
    double tau_coh = 1.0;  // a.u.
    double point_width = default_point_width;

    void validate() const;
    /// Gaussian width actually used for center c.
    double sigma(std::size_t c) const;
    double total_weight() const;
};

/// Cumulant exponent λ = scale(tag)·(|Δr|/ξ + |Δt|/τ_coh).
struct CumulantSpec {
    double xi = 1.0;
    double tau_coh = 1.0;
    double cross_scale = 1.0;
    double aux_scale = 1.0;

    void validate() const;
    double scale(PairingTag tag) const;
};

enum class DensityMode { full, factorized, symmetric };

const char* to_string(DensityMode m);

/// Σ_c w_c N(r; R_c, σ_c²). Static: t is accepted and ignored.
double mean_density(const MatterModel& model, const Vec3& r, double t = 0.0);

/// ⟨n(x1)⟩⟨n(x2)⟩ (1 + f exp(−|Δr|²/2ξ² − Δt²/2τ²)).
double k01(const MatterModel& model, const SpaceTimePoint& x1, const SpaceTimePoint& x2);

double cumulant_lambda(const CumulantSpec& spec, PairingTag tag, const SpaceTimePoint& x1,
                       const SpaceTimePoint& x2);

/// n-point density correlator. `g` must be the G(n) set for full and factorized
/// modes; the symmetric mode uses only the identity pairing.
double k_n(const MatterModel& model, const CumulantSpec& spec, const VertexConfiguration& v,
           const PairingSet& g, DensityMode mode);

/// Analytic form factor F(q) = ∫ e^{iq·r}⟨n(r)⟩ d³r.
cplx form_factor(const MatterModel& model, const Vec3& q);

/// The same transform by adaptive 1-D quadrature per separable factor, restricted
/// to the box [−half_extent, half_extent]³.
cplx form_factor_numeric(const MatterModel& model, const Vec3& q, const Vec3& half_extent);

}  // namespace mpxd
