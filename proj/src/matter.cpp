// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/matter.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace mpxd {

const char* to_string(MatterVariant v) {
    return v == MatterVariant::point_scatterers ? "point-scatterers" : "gaussian-blobs";
}

MatterVariant parse_matter_variant(const std::string& text) {
    if (text == "point-scatterers" || text == "points") return MatterVariant::point_scatterers;
    if (text == "gaussian-blobs" || text == "blobs") return MatterVariant::gaussian_blobs;
    throw Error("unknown matter variant '" + text +
                "' (expected point-scatterers or gaussian-blobs)");
}

const char* to_string(DensityMode m) {
    switch (m) {
        case DensityMode::full: return "full";
        case DensityMode::factorized: return "factorized";
        case DensityMode::symmetric: return "symmetric";
    }
    return "?";
}

void MatterModel::validate() const {
    if (centers.empty()) throw Error("MatterModel: at least one center required");
    for (const auto& c : centers) {
        if (!c.position.allFinite()) throw Error("MatterModel: non-finite center position");
        if (!(c.weight >= 0.0)) throw Error("MatterModel: center weights must be >= 0");
        if (variant == MatterVariant::gaussian_blobs && !(c.width > 0.0))
            throw Error("MatterModel: blob widths must be > 0");
    }
    if (!(xi > 0.0)) throw Error("MatterModel: xi must be > 0");
    if (!(tau_coh > 0.0)) throw Error("MatterModel: tau_coh must be > 0");
    if (!(point_width > 0.0)) throw Error("MatterModel: point_width must be > 0");
    if (!(fluct_amplitude >= 0.0)) throw Error("MatterModel: fluct_amplitude must be >= 0");
}

double MatterModel::sigma(std::size_t c) const {
    return variant == MatterVariant::gaussian_blobs ? centers[c].width : point_width;
}

double MatterModel::total_weight() const {
    double w = 0.0;
    for (const auto& c : centers) w += c.weight;
    return w;
}

void CumulantSpec::validate() const {
    if (!(xi > 0.0)) throw Error("CumulantSpec: xi must be > 0");
    if (!(tau_coh > 0.0)) throw Error("CumulantSpec: tau_coh must be > 0");
    if (!(cross_scale >= 0.0) || !(aux_scale >= 0.0))
        throw Error("CumulantSpec: per-pairing scales must be >= 0");
}

double CumulantSpec::scale(PairingTag tag) const {
    return tag == PairingTag::aux ? aux_scale : cross_scale;
}

double mean_density(const MatterModel& model, const Vec3& r, double /*t*/) {
    double rho = 0.0;
    for (std::size_t c = 0; c < model.centers.size(); ++c) {
        const double s = model.sigma(c);
        const double norm = std::pow(2.0 * M_PI * s * s, -1.5);
        rho += model.centers[c].weight * norm *
               std::exp(-(r - model.centers[c].position).squaredNorm() / (2.0 * s * s));
    }
    return rho;
}

double k01(const MatterModel& model, const SpaceTimePoint& x1, const SpaceTimePoint& x2) {
    const double base = mean_density(model, x1.r, x1.t) * mean_density(model, x2.r, x2.t);
    if (model.fluct_amplitude == 0.0) return base;
    const double dr2 = (x1.r - x2.r).squaredNorm();
    const double dt = x1.t - x2.t;
    const double corr = std::exp(-dr2 / (2.0 * model.xi * model.xi) -
                                 dt * dt / (2.0 * model.tau_coh * model.tau_coh));
    return base * (1.0 + model.fluct_amplitude * corr);
}

double cumulant_lambda(const CumulantSpec& spec, PairingTag tag, const SpaceTimePoint& x1,
                       const SpaceTimePoint& x2) {
    const double s = spec.scale(tag);
    if (s == 0.0) return 0.0;
    return s * ((x1.r - x2.r).norm() / spec.xi + std::abs(x1.t - x2.t) / spec.tau_coh);
}

double k_n(const MatterModel& model, const CumulantSpec& spec, const VertexConfiguration& v,
           const PairingSet& g, DensityMode mode) {
    v.validate();
    const int n = v.order();
    if (mode == DensityMode::symmetric) {
        double prod = 1.0;
        for (int j = 0; j < n; ++j) prod *= k01(model, v.primed[j], v.doubleprimed[j]);
        return prod;
    }
    if (g.cls != PairingClass::G) throw Error("k_n: pairing set is not class G");
    if (g.order_n != n) throw Error("k_n: pairing order does not match vertices");

    auto point = [&](int idx) -> const SpaceTimePoint& {
        return idx < n ? v.primed[idx] : v.doubleprimed[idx - n];
    };
    double total = 0.0;
    for (const auto& p : g.pairings) {
        if (mode == DensityMode::factorized && p.tag != PairingTag::cross) continue;
        double prod = 1.0, lambda = 0.0;
        for (auto [a, b] : vertex_pairs(p, n)) {
            prod *= k01(model, point(a), point(b));
            if (mode == DensityMode::full) lambda += cumulant_lambda(spec, p.tag, point(a), point(b));
        }
        total += prod * std::exp(-lambda);
    }
    return total;
}

cplx form_factor(const MatterModel& model, const Vec3& q) {
    cplx f = 0.0;
    for (std::size_t c = 0; c < model.centers.size(); ++c) {
        const double s = model.sigma(c);
        f += model.centers[c].weight * std::polar(std::exp(-0.5 * q.squaredNorm() * s * s),
                                                  q.dot(model.centers[c].position));
    }
    return f;
}

cplx form_factor_numeric(const MatterModel& model, const Vec3& q, const Vec3& half_extent) {
    using boost::math::quadrature::gauss_kronrod;
    cplx total = 0.0;
    for (std::size_t c = 0; c < model.centers.size(); ++c) {
        const double s = model.sigma(c);
        cplx prod = model.centers[c].weight;
        for (int axis = 0; axis < 3; ++axis) {
            const double mu = model.centers[c].position[axis];
            const double lo = std::max(-half_extent[axis], mu - 14.0 * s);
            const double hi = std::min(half_extent[axis], mu + 14.0 * s);
            if (!(hi > lo)) {
                prod = 0.0;
                break;
            }
            const double qa = q[axis];
            const double norm = 1.0 / std::sqrt(2.0 * M_PI * s * s);
            auto g = [&](double x) { return norm * std::exp(-(x - mu) * (x - mu) / (2.0 * s * s)); };
            const double re = gauss_kronrod<double, 61>::integrate(
                [&](double x) { return g(x) * std::cos(qa * x); }, lo, hi, 15, 1e-13);
            const double im = gauss_kronrod<double, 61>::integrate(
                [&](double x) { return g(x) * std::sin(qa * x); }, lo, hi, 15, 1e-13);
            prod *= cplx(re, im);
        }
        total += prod;
    }
    return total;
}

}  // namespace mpxd
