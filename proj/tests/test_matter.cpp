// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/matter.hpp"
#include "mpxd/combinatorics.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace mpxd;

namespace {

MatterModel blobs(double f = 0.4, double xi = 1.2) {
    MatterModel m;
    m.variant = MatterVariant::gaussian_blobs;
    m.centers = {{Vec3(-0.8, 0.1, 0.0), 1.0, 0.7}, {Vec3(0.9, -0.2, 0.3), 2.0, 0.5}};
    m.fluct_amplitude = f;
    m.xi = xi;
    m.tau_coh = 3.0;
    return m;
}

MatterModel points() {
    MatterModel m;
    m.centers = {{Vec3(-1, 0, 0), 1.0, 0.0}, {Vec3(1, 0, 0), 1.0, 0.0}};
    return m;
}

}  // namespace

TEST_CASE("mean density normalization") {
    MatterModel one;
    one.variant = MatterVariant::gaussian_blobs;
    one.centers = {{Vec3(0.2, 0.1, -0.3), 1.0, 0.8}};
    const Vec3 box = Vec3::Constant(15.0);
    CHECK(std::abs(form_factor_numeric(one, Vec3::Zero(), box) - 1.0) < 1e-6);
    CHECK(std::abs(form_factor_numeric(points(), Vec3::Zero(), box) - 2.0) < 1e-6);
    CHECK(points().total_weight() == 2.0);

    // Peak at the centre over a local grid.
    const double peak = mean_density(one, one.centers[0].position);
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
            for (int k = -2; k <= 2; ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                CHECK(mean_density(one, one.centers[0].position + 0.05 * Vec3(i, j, k)) < peak);
            }
    CHECK(peak == doctest::Approx(std::pow(2.0 * M_PI * 0.64, -1.5)).epsilon(1e-14));
    CHECK(points().sigma(0) == default_point_width);
}

TEST_CASE("form factors") {
    const MatterModel m = blobs();
    for (const Vec3& q : {Vec3(0.3, 0.0, 0.0), Vec3(1.0, -0.5, 0.7), Vec3(0.0, 2.0, 0.1)})
        CHECK(std::abs(form_factor(m, q) - form_factor_numeric(m, q, Vec3::Constant(12.0))) < 1e-9);

    MatterModel one;
    one.variant = MatterVariant::gaussian_blobs;
    one.centers = {{Vec3(0.5, 0.0, 0.0), 1.0, 0.6}};
    const Vec3 q(0.7, 0.4, -0.2);
    CHECK(std::norm(form_factor(one, q)) == doctest::Approx(std::exp(-q.squaredNorm() * 0.36)).epsilon(1e-14));

    // Two unit scatterers at ±1 along x: |F|² = (2 + 2cos(2 q_x)) e^{−q²δ²}.
    const MatterModel p = points();
    for (double qx : {0.0, 0.4, M_PI / 2, M_PI}) {
        const Vec3 qq(qx, 0.0, 0.0);
        const double expect = (2.0 + 2.0 * std::cos(2.0 * qx)) * std::exp(-qx * qx * 0.0025);
        CHECK(std::norm(form_factor(p, qq)) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("two-point density correlator") {
    std::mt19937_64 rng(4);
    const MatterModel m0 = blobs(0.0);
    const MatterModel m = blobs(0.4);
    for (int i = 0; i < 100; ++i) {
        const auto a = test::random_point(rng, 1.5), b = test::random_point(rng, 1.5);
        CHECK(k01(m, a, b) == doctest::Approx(k01(m, b, a)).epsilon(1e-15));
        CHECK(k01(m0, a, b) == mean_density(m0, a.r) * mean_density(m0, b.r));
        const double n = mean_density(m, a.r);
        CHECK(k01(m, a, a) == doctest::Approx(n * n * 1.4).epsilon(1e-14));
    }
}

TEST_CASE("cumulant exponent") {
    CumulantSpec s;
    s.xi = 0.7;
    s.tau_coh = 2.0;
    const SpaceTimePoint o(Vec3::Zero(), 0.0);
    const SpaceTimePoint x(Vec3(0.7, 0.0, 0.0), 0.0);
    CHECK(cumulant_lambda(s, PairingTag::cross, o, x) == doctest::Approx(1.0).epsilon(1e-15));
    s.cross_scale = 0.0;
    CHECK(std::exp(-cumulant_lambda(s, PairingTag::cross, o, x)) == 1.0);
    double last = -1.0;
    for (int i = 0; i <= 20; ++i) {
        const double l = cumulant_lambda(s, PairingTag::aux, o, SpaceTimePoint(Vec3(0.0, 0.1 * i, 0.0), 0.3));
        CHECK(l > last);
        last = l;
    }
    CHECK(cumulant_lambda(s, PairingTag::aux, o, SpaceTimePoint(Vec3::Zero(), 1.0)) == doctest::Approx(0.5));
}

TEST_CASE("n-point density correlator") {
    std::mt19937_64 rng(9);
    const MatterModel m = blobs();
    CumulantSpec s;
    s.xi = 1.2;
    s.tau_coh = 3.0;
    s.cross_scale = 0.5;
    s.aux_scale = 1.5;

    const auto v1 = test::random_vertices(rng, 1, 1.0);
    const PairingSet g1 = enumerate_density_pairings(1);
    const double full1 = k_n(m, s, v1, g1, DensityMode::full);
    CHECK(k_n(m, s, v1, g1, DensityMode::factorized) == doctest::Approx(k01(m, v1.primed[0], v1.doubleprimed[0])));
    CHECK(k_n(m, s, v1, g1, DensityMode::symmetric) == doctest::Approx(k01(m, v1.primed[0], v1.doubleprimed[0])));
    CHECK(full1 == doctest::Approx(k01(m, v1.primed[0], v1.doubleprimed[0]) *
                                   std::exp(-cumulant_lambda(s, PairingTag::cross, v1.primed[0], v1.doubleprimed[0]))));

    const auto v = test::random_vertices(rng, 2, 1.0);
    const auto& a = v.primed;
    const auto& b = v.doubleprimed;
    auto term = [&](const SpaceTimePoint& p, const SpaceTimePoint& q, PairingTag t) {
        return k01(m, p, q) * std::exp(-cumulant_lambda(s, t, p, q));
    };
    const double expect = term(a[0], b[0], PairingTag::cross) * term(a[1], b[1], PairingTag::cross) +
                          term(a[0], b[1], PairingTag::cross) * term(a[1], b[0], PairingTag::cross) +
                          term(a[0], a[1], PairingTag::aux) * term(b[0], b[1], PairingTag::aux);
    const PairingSet g2 = enumerate_density_pairings(2);
    CHECK(k_n(m, s, v, g2, DensityMode::full) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(k_n(m, s, v, g2, DensityMode::factorized) ==
          doctest::Approx(k01(m, a[0], b[0]) * k01(m, a[1], b[1]) + k01(m, a[0], b[1]) * k01(m, a[1], b[0])).epsilon(1e-13));
    CHECK(k_n(m, s, v, g2, DensityMode::symmetric) ==
          doctest::Approx(k01(m, a[0], b[0]) * k01(m, a[1], b[1])).epsilon(1e-14));
}

TEST_CASE("short correlation length removes the auxiliary channel") {
    // Vertices one bohr apart on each branch; ξ shrinks to 1e-2 bohr.
    const VertexConfiguration v({SpaceTimePoint(Vec3(-0.5, 0, 0), 0.0), SpaceTimePoint(Vec3(0.5, 0, 0), 0.0)},
                                {SpaceTimePoint(Vec3(-0.5, 0.1, 0), 0.0), SpaceTimePoint(Vec3(0.5, 0.1, 0), 0.0)});
    const PairingSet g = enumerate_density_pairings(2);
    double last = 1.0;
    for (double xi : {1.0, 0.3, 0.1, 0.03, 0.01}) {
        const MatterModel m = blobs(0.4, xi);
        CumulantSpec s;
        s.xi = xi;
        s.tau_coh = 3.0;
        s.cross_scale = 0.0;
        s.aux_scale = 1.0;
        const double full = k_n(m, s, v, g, DensityMode::full);
        const double fact = k_n(m, s, v, g, DensityMode::factorized);
        const double rel = std::abs(full - fact) / std::abs(full);
        CHECK(rel <= last);
        last = rel;
    }
    CHECK(last < 1e-6);
}

TEST_CASE("model validation") {
    MatterModel m = blobs();
    CHECK_NOTHROW(m.validate());
    m.centers[0].width = 0.0;
    CHECK_THROWS_AS(m.validate(), Error);
    MatterModel e;
    CHECK_THROWS_AS(e.validate(), Error);
    CHECK(parse_matter_variant("gaussian-blobs") == MatterVariant::gaussian_blobs);
    CHECK_THROWS_AS(parse_matter_variant("cloud"), Error);
    CumulantSpec s;
    s.xi = -1.0;
    CHECK_THROWS_AS(s.validate(), Error);
}
