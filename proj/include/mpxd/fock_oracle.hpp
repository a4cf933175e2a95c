// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file fock_oracle.hpp
 * @brief Brute-force normal-ordered field correlators in a truncated few-mode Fock space.
 *
 * The scalar projected field is
 *
 *     A⁺(r, t) = Σ_k g_k (ε_ref* · ε_k) a_k e^{i(k·r − ω_k t)},   g_k = √(2π / (V ω_k α²)),
 *
 * with ε_ref the polarization of the first mode. The n-point value
 * ⟨A⁻(1')⋯A⁻(n') A⁺(n'')⋯A⁺(1'')⟩ is evaluated as ⟨ψ'|ψ''⟩ where
 * ψ = A⁺(n)⋯A⁺(1)|s⟩, averaged over the basis-state mixture for mixed states.
 */

#pragma once

#include "mpxd/combinatorics.hpp"
#include "mpxd/core.hpp"

#include <cstdint>
#include <vector>

namespace mpxd {

enum class StateKind { coherent, thermal, fock };

const char* to_string(StateKind kind);

struct FewModeState {
    std::vector<Mode> modes;
    StateKind kind = StateKind::fock;
    std::vector<cplx> amplitudes;  // coherent
    std::vector<double> nbar;      // thermal
    std::vector<int> occupations;  // fock
    int cutoff = 12;               // max photons per mode at the first attempt

    static FewModeState coherent(std::vector<Mode> modes, std::vector<cplx> alpha, int cutoff = 12);
    static FewModeState thermal(std::vector<Mode> modes, std::vector<double> nbar, int cutoff = 12);
    static FewModeState fock(std::vector<Mode> modes, std::vector<int> occupations, int cutoff = 12);
    static FewModeState vacuum(std::vector<Mode> modes);

    void validate() const;
    int mode_count() const { return static_cast<int>(modes.size()); }
};

struct OracleOptions {
    double volume = 1.0;
    double alpha = units::alpha;
    double tol = 1e-9;           // convergence tolerance, relative to the natural scale
    long max_dimension = 1000000;
};

struct OracleResult {
    cplx value;
    int cutoff = 0;       // cutoff of the accepted evaluation
    double change = 0.0;  // |r(c+2) − r(c)| at acceptance
};

/// Throws Error when the cutoff cannot be raised far enough to converge.
OracleResult dp_n_oracle_detailed(const FewModeState& state, const VertexConfiguration& v,
                                  const OracleOptions& opt = {});
cplx dp_n_oracle(const FewModeState& state, const VertexConfiguration& v,
                 const OracleOptions& opt = {});

/// Two-point function ⟨A⁻(x1) A⁺(x2)⟩ of the same state.
cplx dp1_from_state(const FewModeState& state, const SpaceTimePoint& x1, const SpaceTimePoint& x2,
                    const OracleOptions& opt = {});

/// Σ_w Π_j dp1_from_state(x_{j'}, x_{w(j)''}).
cplx dp_n_factorized_from_state(const FewModeState& state, const VertexConfiguration& v,
                                const PairingSet& w, const OracleOptions& opt = {});

/// Benchmark states: two modes (coherent or thermal) or a single-mode Fock |1⟩.
FewModeState reference_state(StateKind kind);

/// Oracle versus pairing-sum comparison over random vertex configurations.
struct WickCheck {
    StateKind kind = StateKind::coherent;
    int n = 1;
    int configs = 0;
    double max_rel_dev = 0.0;    // max |factorized − oracle| / |oracle| (|factorized| when oracle is 0)
    double mean_ratio = 0.0;     // mean Re(factorized / oracle) over configurations with oracle ≠ 0
    double max_abs_oracle = 0.0;
    double min_abs_factorized = 0.0;
    int max_cutoff = 0;
};

WickCheck wick_check(const FewModeState& state, int n, int configs, std::uint64_t seed,
                     const OracleOptions& opt = {});

}  // namespace mpxd
