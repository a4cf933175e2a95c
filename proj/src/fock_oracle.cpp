// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/fock_oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace mpxd {

namespace {

using SparseState = std::map<long, cplx>;

struct Space {
    int modes;
    int cutoff;
    std::vector<long> stride;
    long dim;

    Space(int m, int c) : modes(m), cutoff(c), stride(m), dim(1) {
        for (int k = 0; k < m; ++k) {
            stride[k] = dim;
            dim *= (c + 1);
        }
    }
    int occupation(long idx, int k) const { return static_cast<int>((idx / stride[k]) % (cutoff + 1)); }
};

/// Coefficients of a_k inside A⁺(x).
std::vector<cplx> field_coefficients(const FewModeState& s, const SpaceTimePoint& x,
                                     const OracleOptions& opt) {
    std::vector<cplx> c(s.modes.size());
    const CVec3& eref = s.modes.front().eps();
    for (std::size_t k = 0; k < s.modes.size(); ++k) {
        const Mode& m = s.modes[k];
        const double g = std::sqrt(2.0 * M_PI / (opt.volume * m.omega() * opt.alpha * opt.alpha));
        const cplx proj = eref.dot(m.eps());  // ε_ref* · ε_k
        c[k] = g * proj * std::polar(1.0, m.k().dot(x.r) - m.omega() * x.t);
    }
    return c;
}

Eigen::VectorXcd apply_field(const Space& sp, const std::vector<cplx>& coef,
                             const Eigen::VectorXcd& in) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(sp.dim);
    for (int k = 0; k < sp.modes; ++k) {
        if (coef[k] == cplx(0.0)) continue;
        for (long idx = 0; idx < sp.dim; ++idx) {
            const int m = sp.occupation(idx, k);
            if (m == sp.cutoff) continue;
            out[idx] += coef[k] * std::sqrt(double(m + 1)) * in[idx + sp.stride[k]];
        }
    }
    return out;
}

SparseState apply_field(const Space& sp, const std::vector<cplx>& coef, const SparseState& in) {
    SparseState out;
    for (const auto& [idx, amp] : in) {
        for (int k = 0; k < sp.modes; ++k) {
            const int m = sp.occupation(idx, k);
            if (m == 0 || coef[k] == cplx(0.0)) continue;
            out[idx - sp.stride[k]] += coef[k] * std::sqrt(double(m)) * amp;
        }
    }
    return out;
}

cplx overlap(const SparseState& a, const SparseState& b) {
    cplx s = 0.0;
    for (const auto& [idx, amp] : a) {
        auto it = b.find(idx);
        if (it != b.end()) s += std::conj(amp) * it->second;
    }
    return s;
}

/// Per-mode weight vectors of the basis-state mixture.
std::vector<std::vector<double>> mixture_weights(const FewModeState& s, int cutoff) {
    std::vector<std::vector<double>> w(s.modes.size(), std::vector<double>(cutoff + 1, 0.0));
    for (std::size_t k = 0; k < s.modes.size(); ++k) {
        if (s.kind == StateKind::thermal) {
            const double nb = s.nbar[k];
            const double r = nb / (1.0 + nb);
            double p = 1.0 / (1.0 + nb);
            for (int m = 0; m <= cutoff; ++m, p *= r) w[k][m] = p;
        } else {
            w[k][s.occupations[k]] = 1.0;
        }
    }
    return w;
}

cplx evaluate_at_cutoff(const FewModeState& s, const VertexConfiguration& v,
                        const OracleOptions& opt, int cutoff) {
    const Space sp(s.mode_count(), cutoff);
    const int n = v.order();
    std::vector<std::vector<cplx>> cp(n), cpp(n);
    for (int j = 0; j < n; ++j) {
        cp[j] = field_coefficients(s, v.primed[j], opt);
        cpp[j] = field_coefficients(s, v.doubleprimed[j], opt);
    }

    if (s.kind == StateKind::coherent) {
        // Truncated (unnormalized-tail) coherent state, exact amplitudes per basis state.
        Eigen::VectorXcd psi(sp.dim);
        for (long idx = 0; idx < sp.dim; ++idx) {
            cplx a = 1.0;
            for (int k = 0; k < sp.modes; ++k) {
                const int m = sp.occupation(idx, k);
                const cplx al = s.amplitudes[k];
                a *= std::exp(-0.5 * std::norm(al)) * std::pow(al, m) /
                     std::sqrt(std::tgamma(double(m) + 1.0));
            }
            psi[idx] = a;
        }
        Eigen::VectorXcd p1 = psi, p2 = psi;
        for (int j = 0; j < n; ++j) {
            p1 = apply_field(sp, cp[j], p1);
            p2 = apply_field(sp, cpp[j], p2);
        }
        return p1.dot(p2);  // conjugates p1
    }

    const auto w = mixture_weights(s, cutoff);
    cplx total = 0.0;
    for (long idx = 0; idx < sp.dim; ++idx) {
        double p = 1.0;
        for (int k = 0; k < sp.modes && p != 0.0; ++k) p *= w[k][sp.occupation(idx, k)];
        if (p == 0.0) continue;
        SparseState a{{idx, 1.0}}, b{{idx, 1.0}};
        for (int j = 0; j < n; ++j) {
            a = apply_field(sp, cp[j], a);
            b = apply_field(sp, cpp[j], b);
        }
        total += p * overlap(a, b);
    }
    return total;
}

double natural_scale(const FewModeState& s, int n, const OracleOptions& opt) {
    double per_order = 0.0;
    for (std::size_t k = 0; k < s.modes.size(); ++k) {
        const double g2 = 2.0 * M_PI / (opt.volume * s.modes[k].omega() * opt.alpha * opt.alpha);
        double occ = 0.0;
        switch (s.kind) {
            case StateKind::coherent: occ = std::norm(s.amplitudes[k]); break;
            case StateKind::thermal: occ = s.nbar[k]; break;
            case StateKind::fock: occ = s.occupations[k]; break;
        }
        per_order += g2 * occ;
    }
    return std::pow(per_order, n);
}

}  // namespace

const char* to_string(StateKind kind) {
    switch (kind) {
        case StateKind::coherent: return "coherent";
        case StateKind::thermal: return "thermal";
        case StateKind::fock: return "fock";
    }
    return "?";
}

FewModeState FewModeState::coherent(std::vector<Mode> modes, std::vector<cplx> alpha, int cutoff) {
    FewModeState s;
    s.modes = std::move(modes);
    s.kind = StateKind::coherent;
    s.amplitudes = std::move(alpha);
    s.cutoff = cutoff;
    s.validate();
    return s;
}

FewModeState FewModeState::thermal(std::vector<Mode> modes, std::vector<double> nbar, int cutoff) {
    FewModeState s;
    s.modes = std::move(modes);
    s.kind = StateKind::thermal;
    s.nbar = std::move(nbar);
    s.cutoff = cutoff;
    s.validate();
    return s;
}

FewModeState FewModeState::fock(std::vector<Mode> modes, std::vector<int> occupations, int cutoff) {
    FewModeState s;
    s.modes = std::move(modes);
    s.kind = StateKind::fock;
    s.occupations = std::move(occupations);
    const int top = s.occupations.empty()
                        ? 0
                        : *std::max_element(s.occupations.begin(), s.occupations.end());
    s.cutoff = std::max(cutoff, top + 4);
    s.validate();
    return s;
}

FewModeState FewModeState::vacuum(std::vector<Mode> modes) {
    const std::size_t m = modes.size();
    return fock(std::move(modes), std::vector<int>(m, 0));
}

void FewModeState::validate() const {
    if (modes.empty() || modes.size() > 3) throw Error("FewModeState: 1 to 3 modes supported");
    if (cutoff < 1) throw Error("FewModeState: cutoff must be >= 1");
    const std::size_t m = modes.size();
    switch (kind) {
        case StateKind::coherent:
            if (amplitudes.size() != m) throw Error("FewModeState: one amplitude per mode");
            break;
        case StateKind::thermal:
            if (nbar.size() != m) throw Error("FewModeState: one mean occupation per mode");
            for (double nb : nbar)
                if (!(nb >= 0.0)) throw Error("FewModeState: mean occupation must be >= 0");
            break;
        case StateKind::fock:
            if (occupations.size() != m) throw Error("FewModeState: one occupation per mode");
            for (int o : occupations)
                if (o < 0) throw Error("FewModeState: occupation must be >= 0");
            if (cutoff < *std::max_element(occupations.begin(), occupations.end()) + 4)
                throw Error("FewModeState: cutoff must exceed max occupation by 4");
            break;
    }
}

OracleResult dp_n_oracle_detailed(const FewModeState& state, const VertexConfiguration& v,
                                  const OracleOptions& opt) {
    state.validate();
    v.validate();
    const int n = v.order();
    if (n < 1 || n > 3) throw Error("dp_n_oracle: n must be in 1..3");
    const double scale = natural_scale(state, n, opt);

    int c = state.cutoff;
    while (true) {
        const double dim = std::pow(double(c + 3), state.mode_count());
        if (dim > double(opt.max_dimension)) {
            std::ostringstream os;
            os << "dp_n_oracle: cutoff too small, convergence not reached below Fock dimension "
               << opt.max_dimension << " (last cutoff " << c << ")";
            throw Error(os.str());
        }
        const cplx lo = evaluate_at_cutoff(state, v, opt, c);
        const cplx hi = evaluate_at_cutoff(state, v, opt, c + 2);
        const double change = std::abs(hi - lo);
        if (change <= opt.tol * (std::abs(hi) + scale)) return {hi, c + 2, change};
        c *= 2;
    }
}

cplx dp_n_oracle(const FewModeState& state, const VertexConfiguration& v, const OracleOptions& opt) {
    return dp_n_oracle_detailed(state, v, opt).value;
}

cplx dp1_from_state(const FewModeState& state, const SpaceTimePoint& x1, const SpaceTimePoint& x2,
                    const OracleOptions& opt) {
    return dp_n_oracle(state, VertexConfiguration({x1}, {x2}), opt);
}

cplx dp_n_factorized_from_state(const FewModeState& state, const VertexConfiguration& v,
                                const PairingSet& w, const OracleOptions& opt) {
    v.validate();
    const int n = v.order();
    if (w.cls != PairingClass::W || w.order_n != n)
        throw Error("dp_n_factorized_from_state: W pairing set of matching order required");
    // The two-point matrix is shared by every pairing.
    std::vector<std::vector<cplx>> m(n, std::vector<cplx>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = dp1_from_state(state, v.primed[i], v.doubleprimed[j], opt);
    cplx total = 0.0;
    for (const auto& p : w.pairings) {
        const auto partner = field_partner(p, n);
        cplx term = 1.0;
        for (int j = 0; j < n; ++j) term *= m[j][partner[j]];
        total += term;
    }
    return total;
}

FewModeState reference_state(StateKind kind) {
    const double e = units::kev_to_hartree(12.4);
    const Mode m1 = mode_from_direction(Vec3::UnitZ(), e, 1, Role::pump);
    const Mode m2 = mode_from_direction(Vec3(std::sin(0.5), 0.0, std::cos(0.5)), e, 1, Role::pump);
    switch (kind) {
        case StateKind::coherent: return FewModeState::coherent({m1, m2}, {cplx(0.9, 0.0), cplx(0.0, 0.6)});
        case StateKind::thermal: return FewModeState::thermal({m1, m2}, {0.4, 0.25});
        case StateKind::fock: return FewModeState::fock({m1}, {1});
    }
    throw Error("reference_state: bad kind");
}

WickCheck wick_check(const FewModeState& state, int n, int configs, std::uint64_t seed,
                     const OracleOptions& opt) {
    WickCheck w;
    w.kind = state.kind;
    w.n = n;
    w.configs = configs;
    w.min_abs_factorized = std::numeric_limits<double>::infinity();
    const PairingSet pairs = enumerate_field_pairings(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    auto point = [&] { return SpaceTimePoint(Vec3(u(rng), u(rng), u(rng)), u(rng)); };
    double ratio_sum = 0.0;
    int ratio_count = 0;
    for (int c = 0; c < configs; ++c) {
        std::vector<SpaceTimePoint> a, b;
        for (int j = 0; j < n; ++j) a.push_back(point());
        for (int j = 0; j < n; ++j) b.push_back(point());
        const VertexConfiguration v(a, b);
        const OracleResult exact = dp_n_oracle_detailed(state, v, opt);
        const cplx fact = dp_n_factorized_from_state(state, v, pairs, opt);
        const double ref = std::abs(exact.value) > 0.0 ? std::abs(exact.value) : std::abs(fact);
        const double dev = ref > 0.0 ? std::abs(fact - exact.value) / ref : 0.0;
        w.max_rel_dev = std::max(w.max_rel_dev, dev);
        w.max_abs_oracle = std::max(w.max_abs_oracle, std::abs(exact.value));
        w.min_abs_factorized = std::min(w.min_abs_factorized, std::abs(fact));
        w.max_cutoff = std::max(w.max_cutoff, exact.cutoff);
        if (std::abs(exact.value) > 0.0) {
            ratio_sum += (fact / exact.value).real();
            ++ratio_count;
        }
    }
    w.mean_ratio = ratio_count ? ratio_sum / ratio_count : 0.0;
    return w;
}

}  // namespace mpxd
