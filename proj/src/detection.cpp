// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/detection.hpp"

#include <cmath>

namespace mpxd {

DetectorPixel::DetectorPixel(int id_, Mode mode_, double weight)
    : id(id_), mode(mode_.with_role(Role::detector)), position(mode.k().normalized()),
      solid_angle_weight(weight) {
    if (!(solid_angle_weight > 0.0)) throw Error("DetectorPixel: solid_angle_weight must be > 0");
}

DetectionConfig::DetectionConfig(std::vector<DetectorPixel> pixels_, bool equal_time_, int n_max)
    : pixels(std::move(pixels_)),
      pairing_set(enumerate_detection_configs(static_cast<int>(pixels.size()), n_max)),
      equal_time(equal_time_) {}

ScatteredAssignment identity_assignment(const DetectionConfig& config) {
    ScatteredAssignment a;
    for (const auto& p : config.pixels) {
        a.primed.push_back(p.mode.with_role(Role::scattered));
        a.doubleprimed.push_back(p.mode.with_role(Role::scattered));
    }
    return a;
}

cplx ds1(const DetectorPixel& pixel, const SpaceTimePoint& x, const Mode& scattered) {
    if (!pixel.mode.same_mode(scattered)) return 0.0;
    const double amp = std::sqrt(pixel.solid_angle_weight / scattered.omega());
    return std::polar(amp, scattered.k().dot(x.r) - scattered.omega() * x.t);
}

cplx ds_n(const DetectionConfig& config, const VertexConfiguration& v,
          const ScatteredAssignment& assignment) {
    v.validate();
    const int n = config.order();
    if (v.order() != n || static_cast<int>(assignment.primed.size()) != n ||
        static_cast<int>(assignment.doubleprimed.size()) != n)
        throw Error("ds_n: vertex, pixel and assignment counts must agree");

    // Elementary contractions are shared by all (σ, τ).
    std::vector<std::vector<cplx>> dp(n, std::vector<cplx>(n)), dpp(n, std::vector<cplx>(n));
    for (int d = 0; d < n; ++d)
        for (int j = 0; j < n; ++j) {
            dp[d][j] = ds1(config.pixels[d], v.primed[j], assignment.primed[j]);
            dpp[d][j] = std::conj(ds1(config.pixels[d], v.doubleprimed[j], assignment.doubleprimed[j]));
        }
    cplx total = 0.0;
    for (const auto& p : config.pairing_set.pairings) {
        const auto m = detection_map(p, n);
        cplx term = 1.0;
        for (int d = 0; d < n && term != cplx(0.0); ++d) term *= dp[d][m.sigma[d]] * dpp[d][m.tau[d]];
        total += term;
    }
    return total;
}

double delta_contraction_weights(const DetectionConfig& config,
                                 const ScatteredAssignment& assignment) {
    const int n = config.order();
    auto is_pixel_mode = [&](const Mode& m) {
        for (const auto& p : config.pixels)
            if (p.mode.same_mode(m)) return true;
        return false;
    };
    double count = 0.0;
    for (const auto& p : config.pairing_set.pairings) {
        const auto m = detection_map(p, n);
        bool ok = true;
        for (int d = 0; d < n && ok; ++d) {
            const Mode& a = assignment.primed[m.sigma[d]];
            const Mode& b = assignment.doubleprimed[m.tau[d]];
            ok = a.same_mode(b) && is_pixel_mode(a);
        }
        if (ok) count += 1.0;
    }
    return count;
}

}  // namespace mpxd
