// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file detection.hpp
 * @brief Detector-mode contractions over discrete pixel modes.
 *
 * Each pixel owns one predesignated detector mode. A scattered photon reaches a
 * pixel only through a Kronecker match of wavevector and polarization index.
 */

#pragma once

#include "mpxd/combinatorics.hpp"
#include "mpxd/core.hpp"

#include <vector>

namespace mpxd {

struct DetectorPixel {
    int id = 0;
    Mode mode;                 // detector role
    Vec3 position;             // far-field direction proxy
    double solid_angle_weight = 1.0;

    DetectorPixel(int id_, Mode mode_, double weight = 1.0);
};

struct DetectionConfig {
    std::vector<DetectorPixel> pixels;
    PairingSet pairing_set;  // class M, order = pixel count
    bool equal_time = true;  // recorded only: detection times never enter the discrete-mode model

    explicit DetectionConfig(std::vector<DetectorPixel> pixels, bool equal_time = true,
                             int n_max = default_n_max);
    int order() const { return static_cast<int>(pixels.size()); }
};

/// Scattered mode emitted at each vertex slot, on each branch.
struct ScatteredAssignment {
    std::vector<Mode> primed;
    std::vector<Mode> doubleprimed;
};

/// Slot j emits into pixel j's mode on both branches.
ScatteredAssignment identity_assignment(const DetectionConfig& config);

/// √w · ω_s^{−1/2} · e^{+i(k_s·r − ω_s t)} for a matched mode, 0 otherwise.
cplx ds1(const DetectorPixel& pixel, const SpaceTimePoint& x, const Mode& scattered);

/// Σ_{(σ,τ)∈M} Π_d ds1(d, x_{σ(d)'}) · conj(ds1(d, x_{τ(d)''})).
cplx ds_n(const DetectionConfig& config, const VertexConfiguration& v,
          const ScatteredAssignment& assignment);

/// Number of M-pairings whose paired scattered modes coincide on both branches at
/// every detection slot, with the common mode one of the pixel modes.
double delta_contraction_weights(const DetectionConfig& config,
                                 const ScatteredAssignment& assignment);

}  // namespace mpxd
