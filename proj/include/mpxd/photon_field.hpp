// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file photon_field.hpp
 * @brief Incoming-field two-point correlators, their n-point assembly and pulse kernels.
 *
 * Conventions: dp1(x1, x2) = ⟨A⁻(x1) A⁺(x2)⟩, first argument carries A⁻.
 * The positive-frequency amplitude of the reference pulse is
 *
 *     A₀(r, t) = E₀ · env(t) · e^{i(k·r − ωt)},  env(t) = exp(−2Γ₀ (t − t_c)²),
 *
 * so that at centred times t = t̄ ∓ τ̄/2 the carrier-stripped correlator
 * separates into F1(t̄) = E₀² exp(−4Γ₀ (t̄ − t_c)²) and F2(τ̄) = exp(−Γ₀ τ̄²).
 */

#pragma once

#include "mpxd/combinatorics.hpp"
#include "mpxd/core.hpp"

#include <optional>
#include <string>

namespace mpxd {

enum class FieldVariant { coherent, gaussian_schell, thermal };

const char* to_string(FieldVariant v);
FieldVariant parse_field_variant(const std::string& text);

struct PulseEnvelope {
    double tau0 = 1.0;  // FWHM of the amplitude envelope (a.u.)
    double t_center = 0.0;
    Vec3 r0 = Vec3::Zero();

    PulseEnvelope() = default;
    PulseEnvelope(double tau0_, double t_center_, const Vec3& r0_);

    /// Γ₀ = 2 ln2 / τ₀².
    double gamma0() const;
    /// Amplitude envelope env(t).
    double operator()(double t) const;
    /// Width σ of env(t) = exp(−(t − t_c)²/(2σ²)), the natural vertex-time sampling width.
    double amplitude_sigma() const;
};

struct FieldModel {
    FieldVariant variant = FieldVariant::coherent;
    double e0 = 1.0;
    Mode carrier;
    double xi_t = 1.0;   // transverse coherence length (bohr), gaussian-schell
    double tau_c = 1.0;  // coherence time (a.u.), gaussian-schell
    PulseEnvelope envelope;

    FieldModel(FieldVariant v, double e0_, Mode carrier_, PulseEnvelope env = {},
               double xi_t_ = 1.0, double tau_c_ = 1.0);

    /// Pulsed variants carry the envelope; thermal light is stationary.
    bool pulsed() const { return variant != FieldVariant::thermal; }
    /// Effective temporal width Γ of the carrier-stripped τ̄ kernel exp(−Γ τ̄²).
    double gamma_effective() const;
};

/// Positive-frequency amplitude A₀(x) of the coherent reference pulse.
cplx coherent_amplitude(const FieldModel& model, const SpaceTimePoint& x);

cplx dp1(const FieldModel& model, const SpaceTimePoint& x1, const SpaceTimePoint& x2);

/// Σ_w Π_j dp1(x_{j'}, x_{w(j)''}).
cplx dp_n_factorized(const FieldModel& model, const VertexConfiguration& v, const PairingSet& w);

/// Exact n-point correlator of the model's field statistics.
///
/// Coherent light factorizes into a single product; gaussian-schell and
/// thermal light are chaotic (Gaussian) fields whose moments are the
/// permanent of the two-point matrix, i.e. the full W-sum.
cplx dp_n_exact(const FieldModel& model, const VertexConfiguration& v);

/// Carrier-stripped correlator at (r0, t̄ ∓ τ̄/2). For pulses this is F1(t̄)·F2(τ̄)
/// (times the coherence-time factor for gaussian-schell).
double intensity(const FieldModel& model, const Vec3& r0, double tau_bar, double t_bar);

/// F1(t̄) = E₀² exp(−4Γ₀ (t̄ − t_c)²).
double pulse_f1(const FieldModel& model, double t_bar);
/// ∫ F1 dt̄ = E₀² √(π / (4Γ₀)).
double pulse_fluence(const FieldModel& model);

/// ∫ exp(−Γ τ²) e^{−i ω̃ τ} dτ by adaptive Gauss–Kronrod quadrature.
double pulse_kernel_transform_numeric(double omega_tilde, double gamma);
/// √(π/Γ) exp(−ω̃²/(4Γ)).
double pulse_kernel_transform_analytic(double omega_tilde, double gamma);
/// The form √(π/Γ) exp(−ω̃²/Γ), kept only to quantify its disagreement with the transform.
double pulse_kernel_transform_printed(double omega_tilde, double gamma);

}  // namespace mpxd
