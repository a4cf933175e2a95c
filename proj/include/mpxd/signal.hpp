// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file signal.hpp
 * @brief n-photon diffraction signals at every level of the approximation hierarchy.
 *
 * Tiers, from the most complete to the classical limit:
 *
 *   full            ds_n · K_n(full)       · exact n-point field correlator
 *   field_fact      ds_n · K_n(full)       · Σ_w Π dp1
 *   both_fact       ds_n · K_n(factorized) · Σ_w Π dp1
 *   symmetric       delta weight · Π_j K₀¹(j';j'') I(r₀, τ̄_j, t̄_j) × vertex phases
 *   gaussian_pulse  symmetric tier with the τ̄ and t̄ integrals done by quadrature
 *   classical       Π_j fluence · √(π/Γ) · |F(q̃_j)|²
 *
 * The first five integrate over the 2n vertex space-time coordinates by
 * stratified importance-sampled Monte Carlo. All Monte Carlo tiers in a single
 * run share their samples, so differences between tiers carry correlated
 * errors and can be resolved far below the per-tier noise.
 *
 * Reported values are stripped of the constant (c̃²α⁴)ⁿ; `raw_values` carry it
 * at the configured mode volume.
 */

#pragma once

#include "mpxd/detection.hpp"
#include "mpxd/matter.hpp"
#include "mpxd/photon_field.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpxd {

enum class Tier { full, field_fact, both_fact, symmetric, gaussian_pulse, classical };

const char* to_string(Tier t);
Tier parse_tier(const std::string& text);
/// Comma-separated list, e.g. "full,both_fact,classical".
std::vector<Tier> parse_tier_list(const std::string& text);
bool is_monte_carlo(Tier t);

enum class IntegrationMethod { monte_carlo, tensor_grid };

const char* to_string(IntegrationMethod m);
IntegrationMethod parse_integration_method(const std::string& text);

struct IntegrationConfig {
    IntegrationMethod method = IntegrationMethod::monte_carlo;
    long samples = 100000;            // per q-point
    std::uint64_t rng_seed = 1;
    Vec3 spatial_box = Vec3::Constant(20.0);  // full extents of the tensor-grid/quadrature domain
    double time_window = 0.0;         // stationary light: width of the uniform time window
    long batch_size = 4096;
    int threads = 0;                  // 0: hardware concurrency; MPXD_THREADS caps either way
    int grid_nodes = 5;               // per dimension, tensor-grid only
    std::optional<double> target_rel_stderr;

    void validate() const;
};

/// One point of the diffraction pattern: the pixel set reached by the n photons.
struct PatternPoint {
    Vec3 q;                  // reported transfer (scanned slot)
    DetectionConfig detector;
};

struct SignalProblem {
    int n = 1;
    FieldModel field;
    MatterModel matter;
    CumulantSpec cumulant;
    std::vector<PatternPoint> points;
    UnitsContext units;

    void validate() const;
};

struct SignalGrid {
    Tier tier = Tier::full;
    std::vector<Vec3> q_points;
    std::vector<double> values;
    std::vector<double> mc_stderr;
    std::vector<double> raw_values;
    double prefactor = 1.0;       // raw = prefactor × value
    long samples_per_point = 0;   // zero for analytic tiers
    long strata = 0;
    bool budget_exceeded = false;
};

/// Difference statistics of two tiers evaluated on the same samples.
struct TierDifference {
    Tier a, b;
    std::vector<double> diff;        // a − b per point
    std::vector<double> diff_stderr;
};

struct SignalRun {
    std::vector<SignalGrid> grids;  // in request order
    std::vector<TierDifference> differences;
    bool budget_exceeded = false;

    const SignalGrid& grid(Tier t) const;
    const TierDifference& difference(Tier a, Tier b) const;
};

/// Evaluates every requested tier on shared samples.
SignalRun compute_signals(const SignalProblem& problem, const std::vector<Tier>& tiers,
                          const IntegrationConfig& integ);

SignalGrid signal_full(const SignalProblem& p, const IntegrationConfig& integ);
SignalGrid signal_field_factorized(const SignalProblem& p, const IntegrationConfig& integ);
SignalGrid signal_both_factorized(const SignalProblem& p, const IntegrationConfig& integ);
SignalGrid signal_symmetric(const SignalProblem& p, const IntegrationConfig& integ);
SignalGrid signal_gaussian_pulse(const SignalProblem& p, const IntegrationConfig& integ);
SignalGrid signal_classical(const SignalProblem& p);

struct TierGap {
    Tier tier;
    std::vector<double> rel_dev;  // (v − v_ref) / |v_ref| per point
    double l2_gap = 0.0;          // ‖v − v_ref‖₂ / ‖v_ref‖₂
    double l2_gap_stderr = 0.0;
};

struct HierarchyReport {
    Tier reference;
    SignalRun run;
    std::vector<TierGap> gaps;  // one per non-reference tier
};

/// Runs `tiers` on a shared grid and seed; gaps are taken against the first tier.
HierarchyReport hierarchy_report(const SignalProblem& p, const std::vector<Tier>& tiers,
                                 const IntegrationConfig& integ);

/// Worker count after applying the MPXD_THREADS cap.
int resolve_thread_count(int requested);

}  // namespace mpxd
