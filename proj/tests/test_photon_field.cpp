// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/photon_field.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace mpxd;

namespace {

Mode carrier() { return mode_from_direction(Vec3::UnitZ(), units::kev_to_hartree(12.4), 1, Role::pump); }

// Short pulse so that random vertex times probe the envelope.
FieldModel model(FieldVariant v, double e0 = 1.3) {
    return FieldModel(v, e0, carrier(), PulseEnvelope(3.0, 0.2, Vec3::Zero()), 2.5, 1.7);
}

// Permanent by summing over all permutations.
cplx permanent(const std::vector<std::vector<cplx>>& a) {
    const int n = static_cast<int>(a.size());
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    cplx s = 0.0;
    do {
        cplx t = 1.0;
        for (int i = 0; i < n; ++i) t *= a[i][p[i]];
        s += t;
    } while (std::next_permutation(p.begin(), p.end()));
    return s;
}

}  // namespace

TEST_CASE("pulse envelope") {
    const PulseEnvelope env(4.0, 1.0, Vec3::Zero());
    CHECK(env.gamma0() == doctest::Approx(2.0 * std::log(2.0) / 16.0).epsilon(1e-15));
    CHECK(env(1.0) == 1.0);
    // The amplitude envelope has FWHM τ₀.
    CHECK(env(1.0 + 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(env(1.0 - 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(env(1.0 + env.amplitude_sigma()) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK_THROWS_AS(PulseEnvelope(0.0, 0.0, Vec3::Zero()), Error);
}

TEST_CASE("two-point function basics") {
    std::mt19937_64 rng(11);
    for (auto v : {FieldVariant::coherent, FieldVariant::gaussian_schell, FieldVariant::thermal}) {
        CAPTURE(to_string(v));
        const FieldModel m = model(v);
        for (int i = 0; i < 100; ++i) {
            const auto a = test::random_point(rng), b = test::random_point(rng);
            CHECK(std::abs(dp1(m, a, b) - std::conj(dp1(m, b, a))) <= 1e-14 * std::abs(dp1(m, a, b)) + 1e-300);
        }
    }
    const FieldModel c = model(FieldVariant::coherent);
    const SpaceTimePoint x(Vec3(0.1, 0.2, 0.3), 1.4);
    const cplx self = dp1(c, x, x);
    const double expect = std::pow(1.3 * std::exp(-2.0 * c.envelope.gamma0() * 1.2 * 1.2), 2);
    CHECK(std::abs(self.imag()) < 1e-15);
    CHECK(self.real() == doctest::Approx(expect).epsilon(1e-14));

    const FieldModel gs = model(FieldVariant::gaussian_schell);
    const SpaceTimePoint far(Vec3(200.0, 0.0, 0.0), 0.2);
    CHECK(std::abs(dp1(gs, SpaceTimePoint(Vec3::Zero(), 0.2), far)) < 1e-300);

    const FieldModel th = model(FieldVariant::thermal, 0.8);
    CHECK(std::abs(dp1(th, x, far)) == doctest::Approx(0.64));
}

TEST_CASE("n-point assembly") {
    std::mt19937_64 rng(5);
    for (auto v : {FieldVariant::coherent, FieldVariant::gaussian_schell, FieldVariant::thermal}) {
        CAPTURE(to_string(v));
        const FieldModel m = model(v);
        const auto v1 = test::random_vertices(rng, 1);
        CHECK(test::rel_err(dp_n_factorized(m, v1, enumerate_field_pairings(1)),
                            dp1(m, v1.primed[0], v1.doubleprimed[0])) < 1e-15);

        const auto v2 = test::random_vertices(rng, 2);
        const cplx two = dp1(m, v2.primed[0], v2.doubleprimed[0]) * dp1(m, v2.primed[1], v2.doubleprimed[1]) +
                         dp1(m, v2.primed[0], v2.doubleprimed[1]) * dp1(m, v2.primed[1], v2.doubleprimed[0]);
        CHECK(test::rel_err(dp_n_factorized(m, v2, enumerate_field_pairings(2)), two) < 1e-14);

        for (int n = 1; n <= 4; ++n) {
            const auto vn = test::random_vertices(rng, n, 1.0);
            std::vector<std::vector<cplx>> a(n, std::vector<cplx>(n));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a[i][j] = dp1(m, vn.primed[i], vn.doubleprimed[j]);
            CHECK(test::rel_err(dp_n_factorized(m, vn, enumerate_field_pairings(n)), permanent(a)) < 1e-13);
        }
    }
}

TEST_CASE("exact correlators") {
    std::mt19937_64 rng(8);
    const FieldModel c = model(FieldVariant::coherent);
    for (int n = 1; n <= 3; ++n) {
        const auto v = test::random_vertices(rng, n, 1.0);
        cplx prod = 1.0;
        for (int j = 0; j < n; ++j)
            prod *= std::conj(coherent_amplitude(c, v.primed[j])) * coherent_amplitude(c, v.doubleprimed[j]);
        CHECK(test::rel_err(dp_n_exact(c, v), prod) < 1e-14);
        // A coherent two-point function is a rank-one product, so the pairing
        // sum over-counts the exact correlator by exactly n!.
        const double fact = std::tgamma(n + 1.0);
        CHECK(test::rel_err(dp_n_factorized(c, v, enumerate_field_pairings(n)), fact * dp_n_exact(c, v)) < 1e-13);
    }
    for (auto var : {FieldVariant::gaussian_schell, FieldVariant::thermal}) {
        const FieldModel m = model(var);
        for (int n = 1; n <= 3; ++n) {
            const auto v = test::random_vertices(rng, n, 1.0);
            CHECK(test::rel_err(dp_n_exact(m, v), dp_n_factorized(m, v, enumerate_field_pairings(n))) < 1e-13);
        }
    }
}

TEST_CASE("pulse intensity factors") {
    const FieldModel c = model(FieldVariant::coherent, 1.7);
    const double g = c.envelope.gamma0();
    const Vec3 r0 = Vec3::Zero();
    CHECK(intensity(c, r0, 0.0, 0.9) == doctest::Approx(pulse_f1(c, 0.9)).epsilon(1e-14));
    CHECK(pulse_f1(c, 0.9) == doctest::Approx(1.7 * 1.7 * std::exp(-4.0 * g * 0.49)).epsilon(1e-14));
    const double tau0 = c.envelope.tau0;
    CHECK(intensity(c, r0, tau0, c.envelope.t_center) / pulse_f1(c, c.envelope.t_center) ==
          doctest::Approx(0.25).epsilon(1e-14));
    CHECK(intensity(c, r0, 1.1, 0.4) == doctest::Approx(pulse_f1(c, 0.4) * std::exp(-g * 1.21)).epsilon(1e-13));

    const FieldModel gs = model(FieldVariant::gaussian_schell, 1.7);
    CHECK(intensity(gs, r0, 1.1, 0.4) ==
          doctest::Approx(pulse_f1(gs, 0.4) * std::exp(-gs.gamma_effective() * 1.21)).epsilon(1e-13));
    CHECK_THROWS_AS(model(FieldVariant::thermal).gamma_effective(), Error);

    // Fluence against a fine midpoint rule.
    double sum = 0.0;
    const double h = 1e-3;
    for (double t = -30.0; t < 30.0; t += h) sum += pulse_f1(c, t + 0.5 * h) * h;
    CHECK(pulse_fluence(c) == doctest::Approx(sum).epsilon(1e-10));
}

TEST_CASE("pulse kernel transform") {
    for (double g : {0.01, 0.3, 2.0}) {
        CAPTURE(g);
        CHECK(std::abs(pulse_kernel_transform_numeric(0.0, g) - std::sqrt(M_PI / g)) < 1e-8);
        CHECK(std::abs(pulse_kernel_transform_numeric(std::sqrt(g), g) - std::sqrt(M_PI / g) * std::exp(-0.25)) < 1e-8);
        for (int i = 0; i <= 40; ++i) {
            const double w = 4.0 * std::sqrt(g) * i / 40.0;
            CHECK(std::abs(pulse_kernel_transform_numeric(w, g) - pulse_kernel_transform_analytic(w, g)) < 1e-8);
        }
        // The narrowband replacement of the kernel by its ω̃ = 0 value errs by at most ω̃²/(4Γ).
        const double w = 0.2 * std::sqrt(g);
        const double k0 = pulse_kernel_transform_numeric(0.0, g);
        CHECK(std::abs(pulse_kernel_transform_numeric(w, g) - k0) / k0 <= w * w / (4.0 * g));
    }
    // The exp(−ω̃²/Γ) form disagrees with the transform away from ω̃ = 0.
    CHECK(std::abs(pulse_kernel_transform_printed(1.0, 1.0) - pulse_kernel_transform_analytic(1.0, 1.0)) > 0.5);
    CHECK(pulse_kernel_transform_printed(0.0, 1.0) == doctest::Approx(std::sqrt(M_PI)));
}

TEST_CASE("variant parsing") {
    CHECK(parse_field_variant("coherent") == FieldVariant::coherent);
    CHECK(parse_field_variant("gaussian-schell") == FieldVariant::gaussian_schell);
    CHECK(parse_field_variant("thermal") == FieldVariant::thermal);
    CHECK_THROWS_AS(parse_field_variant("laser"), Error);
}
