// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance               run all criteria
//   acceptance --criterion N run criterion N only
//
// Exit status is 0 only when every selected criterion passes.

#include "mpxd/combinatorics.hpp"
#include "mpxd/config.hpp"
#include "mpxd/fock_oracle.hpp"
#include "mpxd/output.hpp"
#include "mpxd/photon_field.hpp"
#include "mpxd/signal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mpxd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> notes;  // printed below the result line

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("failed: " + what);
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- 1 ---------------------------------------------------------------------

std::set<std::vector<std::pair<int, int>>> permutation_matchings(int n, bool cross_only) {
    std::vector<int> v(2 * n);
    std::iota(v.begin(), v.end(), 0);
    std::set<std::vector<std::pair<int, int>>> out;
    do {
        std::vector<std::pair<int, int>> m;
        bool ok = true;
        for (int i = 0; i < 2 * n; i += 2) {
            const int a = std::min(v[i], v[i + 1]), b = std::max(v[i], v[i + 1]);
            ok = ok && (!cross_only || (a < n && b >= n));
            m.emplace_back(a, b);
        }
        if (!ok) continue;
        std::sort(m.begin(), m.end());
        out.insert(m);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

std::set<std::vector<std::pair<int, int>>> vertex_sets(const PairingSet& s) {
    std::set<std::vector<std::pair<int, int>>> out;
    for (const auto& p : s.pairings) {
        auto m = vertex_pairs(p, s.order_n);
        for (auto& pr : m)
            if (pr.first > pr.second) std::swap(pr.first, pr.second);
        std::sort(m.begin(), m.end());
        out.insert(m);
    }
    return out;
}

Outcome criterion_counts() {
    Outcome o;
    const auto t0 = Clock::now();
    const std::size_t m[] = {1, 4, 36}, w[] = {1, 2, 6}, g[] = {1, 3, 15};
    std::string counts;
    for (int n = 1; n <= 3; ++n) {
        const auto M = enumerate_detection_configs(n).size();
        const auto W = enumerate_field_pairings(n).size();
        const auto G = enumerate_density_pairings(n).size();
        o.require(M == m[n - 1] && W == w[n - 1] && G == g[n - 1], "counts at n=" + std::to_string(n));
        counts += " n=" + std::to_string(n) + ":(" + std::to_string(M) + "," + std::to_string(W) + "," +
                  std::to_string(G) + ")";
    }
    for (int n = 1; n <= 4; ++n) {
        for (auto c : {PairingClass::M, PairingClass::W, PairingClass::G})
            o.require(matching_count_oracle(n, c) == std::int64_t(enumerate(c, n).size()),
                      std::string("oracle count ") + to_string(c) + " n=" + std::to_string(n));
        o.require(vertex_sets(enumerate_density_pairings(n)) == permutation_matchings(n, false),
                  "G structure n=" + std::to_string(n));
        o.require(vertex_sets(enumerate_field_pairings(n)) == permutation_matchings(n, true),
                  "W structure n=" + std::to_string(n));
    }
    const double s = seconds_since(t0);
    o.require(s < 1.0, "runtime < 1 s");
    o.detail = "(M,W,G)" + counts + "; oracle agreement n<=4; " + fmt("%.3f s", s);
    return o;
}

// --- 2 ---------------------------------------------------------------------

IndexLabel parse_label(const std::string& s) {
    IndexLabel l;
    l.slot = std::stoi(s);
    const auto primes = std::count(s.begin(), s.end(), '\'');
    l.branch = primes == 0 ? Branch::detection : primes == 1 ? Branch::primed : Branch::doubleprimed;
    return l;
}

PairingSet parse_golden(const std::string& text, PairingClass cls, int n) {
    PairingSet set{n, cls, {}};
    std::istringstream in(text);
    std::string line;
    const std::regex factor(R"(([A-Za-z*]+)\(([0-9']+);([0-9']+)\))");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Pairing p;
        p.cls = cls;
        if (cls == PairingClass::G) p.tag = line.rfind("cross", 0) == 0 ? PairingTag::cross : PairingTag::aux;
        for (auto it = std::sregex_iterator(line.begin(), line.end(), factor); it != std::sregex_iterator(); ++it) {
            IndexLabel a = parse_label((*it)[2]), b = parse_label((*it)[3]);
            if (b < a) std::swap(a, b);
            p.pairs.emplace_back(a, b);
        }
        set.pairings.push_back(p);
    }
    canonicalize(set);
    return set;
}

Outcome criterion_goldens() {
    Outcome o;
    struct Case { const char* file; PairingClass cls; int n; bool primary; };
    int matched = 0, total = 0;
    for (const Case& c : {Case{"detection_n2.txt", PairingClass::M, 2, true},
                          Case{"field_n2.txt", PairingClass::W, 2, true},
                          Case{"density_n2.txt", PairingClass::G, 2, true},
                          Case{"detection_n3.txt", PairingClass::M, 3, false},
                          Case{"field_n3.txt", PairingClass::W, 3, false},
                          Case{"density_n3.txt", PairingClass::G, 3, false}}) {
        const std::string text = read_file(std::string(MPXD_GOLDEN_DIR) + "/" + c.file);
        const std::string ours = serialize_text(enumerate(c.cls, c.n));
        const bool ok = !text.empty() && serialize_text(parse_golden(text, c.cls, c.n)) == ours;
        ++total;
        matched += ok;
        o.require(ok, std::string("golden ") + c.file);
        if (c.primary) o.require(ours == text, std::string("byte-exact canonical text ") + c.file);
    }
    o.detail = std::to_string(matched) + "/" + std::to_string(total) +
               " golden expansions match after canonical ordering (second order byte-exact)";
    return o;
}

// --- 3 ---------------------------------------------------------------------

Outcome criterion_wick() {
    Outcome o;
    const auto t0 = Clock::now();
    const int configs = 50;
    double worst = 0.0;
    for (StateKind kind : {StateKind::coherent, StateKind::thermal})
        for (int n = 1; n <= 3; ++n) {
            const WickCheck w = wick_check(reference_state(kind), n, configs, 1000 + n);
            worst = std::max(worst, w.max_rel_dev);
            const bool ok = w.max_rel_dev <= 1e-9;
            o.notes.push_back(std::string(to_string(kind)) + " n=" + std::to_string(n) +
                              ": max rel dev " + fmt("%.3e", w.max_rel_dev) + ", mean factorized/oracle " +
                              fmt("%.12g", w.mean_ratio) + (ok ? "" : "  <-- exceeds 1e-9"));
            o.require(ok, std::string(to_string(kind)) + " n=" + std::to_string(n) + " within 1e-9");
        }
    const double s = seconds_since(t0);
    o.require(s < 60.0, "runtime < 1 min");
    o.detail = "2-mode coherent and thermal, n=1..3, " + std::to_string(configs) +
               " configurations each; worst rel dev " + fmt("%.3e", worst) + "; " + fmt("%.1f s", s);
    return o;
}

// --- 4 ---------------------------------------------------------------------

Outcome criterion_fock() {
    Outcome o;
    const auto t0 = Clock::now();
    const WickCheck w = wick_check(reference_state(StateKind::fock), 2, 50, 77);
    o.require(w.max_abs_oracle == 0.0, "oracle value 0");
    o.require(w.min_abs_factorized > 0.0, "factorized value > 0");
    o.require(w.max_rel_dev >= 0.5, "relative gap >= 0.5");
    const double s = seconds_since(t0);
    o.require(s < 10.0, "runtime < 10 s");
    o.detail = "single-mode |1>, n=2: max |oracle| " + fmt("%.3g", w.max_abs_oracle) + ", min |factorized| " +
               fmt("%.4g", w.min_abs_factorized) + ", relative gap " + fmt("%.3g", w.max_rel_dev) + "; " +
               fmt("%.2f s", s);
    return o;
}

// --- 5 ---------------------------------------------------------------------

Outcome criterion_classical_limit() {
    Outcome o;
    const auto t0 = Clock::now();
    const RunConfig cfg = parse_config(std::string(MPXD_CONFIG_DIR) + "/two_scatterers_scan.yaml");
    validate_config(cfg);
    const SignalProblem p = build_problem(cfg);
    const double d = (cfg.matter.centers[1].position - cfg.matter.centers[0].position).norm();
    const double delta = cfg.matter.point_width;
    const auto run = compute_signals(p, {Tier::full, Tier::field_fact, Tier::both_fact}, cfg.integration);

    // Two point scatterers of width δ: |F(q)|² = (2 + 2cos(q_x d)) e^{−|q|²δ²}.
    auto shape = [&](const Vec3& q) { return (2.0 + 2.0 * std::cos(q.x() * d)) * std::exp(-q.squaredNorm() * delta * delta); };
    const double ref0 = shape(p.points.front().q);
    std::string summary;
    for (const auto& g : run.grids) {
        const double v0 = g.values.front(), s0 = g.mc_stderr.front();
        double worst_z = 0.0, worst_rel = 0.0;
        int outside = 0;
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            const double v = g.values[i], s = g.mc_stderr[i];
            const double ratio = v / v0;
            const double ratio_err = std::abs(ratio) * std::sqrt(std::pow(s / v, 2) + std::pow(s0 / v0, 2));
            const double z = std::abs(ratio - shape(p.points[i].q) / ref0) / ratio_err;
            worst_z = std::max(worst_z, z);
            worst_rel = std::max(worst_rel, s / std::abs(v));
            outside += z > 3.0;
        }
        o.require(outside == 0, std::string(to_string(g.tier)) + ": " + std::to_string(outside) +
                                    " of 64 points beyond 3 stderr");
        o.require(worst_rel <= 0.02, std::string(to_string(g.tier)) + ": stderr/value <= 2%");
        o.require(g.samples_per_point >= 1000000, "10^6 samples per point");
        summary += std::string(" ") + to_string(g.tier) + " max|z|=" + fmt("%.2f", worst_z) + " max rel stderr=" +
                   fmt("%.4f", worst_rel) + ";";
    }
    const double s = seconds_since(t0);
    o.require(p.points.size() == 64, "64 q-points");
    o.require(s <= 300.0, "runtime <= 5 min");
    o.detail = "n=1, d=" + fmt("%g", d) + " bohr, 64 points, 10^6 samples:" + summary + " " + fmt("%.0f s", s);
    return o;
}

// --- 6 ---------------------------------------------------------------------

Outcome criterion_pulse_kernel() {
    Outcome o;
    const auto t0 = Clock::now();
    const PulseEnvelope env(units::fs_to_au(1.0), 0.0, Vec3::Zero());
    const double g = env.gamma0();
    double worst = 0.0, printed_worst = 0.0, printed_at = 0.0;
    const int steps = 400;
    for (int i = 0; i <= steps; ++i) {
        const double w = 4.0 * std::sqrt(g) * i / steps;
        const double num = pulse_kernel_transform_numeric(w, g);
        worst = std::max(worst, std::abs(num - pulse_kernel_transform_analytic(w, g)));
        const double dp = std::abs(num - pulse_kernel_transform_printed(w, g));
        if (dp > printed_worst) {
            printed_worst = dp;
            printed_at = w / std::sqrt(g);
        }
    }
    o.require(worst <= 1e-8, "numeric vs sqrt(pi/G) exp(-w^2/(4G)) within 1e-8");
    const double s = seconds_since(t0);
    o.require(s < 1.0, "runtime < 1 s");
    o.detail = "tau0 = 1 fs, Gamma0 = " + fmt("%.6e", g) + ", max |numeric - analytic| = " + fmt("%.2e", worst) +
               " over [0, 4 sqrt(Gamma0)]; " + fmt("%.3f s", s);
    o.notes.push_back("known discrepancy (annotated, not a failure): the exp(-w^2/Gamma0) form deviates by up to " +
                      fmt("%.4g", printed_worst) + " (at w = " + fmt("%.2f", printed_at) + " sqrt(Gamma0), peak " +
                      fmt("%.4g", std::sqrt(M_PI / g)) + ")");
    return o;
}

// --- 7 ---------------------------------------------------------------------

Outcome criterion_hierarchy_sweep() {
    Outcome o;
    const auto t0 = Clock::now();
    RunConfig cfg = parse_config(std::string(MPXD_CONFIG_DIR) + "/hierarchy_n2.yaml");
    validate_config(cfg);
    const std::vector<double> xis{10.0, 3.0, 1.0, 0.3, 0.1};
    std::vector<double> gap, err;
    for (double xi : xis) {
        cfg.matter.xi = xi;
        cfg.cumulant.xi = xi;
        const auto rep = hierarchy_report(build_problem(cfg), {Tier::full, Tier::both_fact}, cfg.integration);
        gap.push_back(rep.gaps.front().l2_gap);
        err.push_back(rep.gaps.front().l2_gap_stderr);
        o.notes.push_back("xi = " + fmt("%g", xi) + " bohr: relative L2 gap " + fmt("%.6g", gap.back()) + " +- " +
                          fmt("%.2g", err.back()));
    }
    for (std::size_t i = 0; i + 1 < gap.size(); ++i)
        o.require(gap[i + 1] <= gap[i] + 3.0 * std::hypot(err[i], err[i + 1]),
                  "non-increasing between xi=" + fmt("%g", xis[i]) + " and xi=" + fmt("%g", xis[i + 1]));
    o.require(gap.front() - gap.back() > 3.0 * std::hypot(err.front(), err.back()), "resolved overall decrease");
    const double s = seconds_since(t0);
    o.require(s <= 1200.0, "runtime <= 20 min");
    o.detail = "n=2 two-blob geometry, xi in {10,3,1,0.3,0.1}: gap " + fmt("%.4g", gap.front()) + " -> " +
               fmt("%.3g", gap.back()) + ", monotone within 3 sigma; " + fmt("%.1f s", s);
    return o;
}

// --- 8 ---------------------------------------------------------------------

const char* symmetric_config = R"(schema_version: 1
n: 1
field: {variant: gaussian-schell, e0: 0.7, tau0_fs: 1.0, xi_t: 10.0, tau_c: 100.0}
matter:
  variant: gaussian-blobs
  centers: [[-1.2, 0, 0, 1, 0.4], [1.2, 0, 0, 1, 0.4]]
  fluct_amplitude: 0.2
  xi: 1.0
  tau_coh: 50.0
detector:
  pixels: [{direction: [0, 0, 1]}]
scan: {axis: [1, 0, 0], s_min: -2.0, s_max: 2.0, points: 9}
integration: {samples: 200000, seed: 8}
)";

Outcome criterion_scaling_symmetry() {
    Outcome o;
    const auto t0 = Clock::now();

    // Intensity scaling on factorized tiers, n = 1 and 2.
    double worst_scale = 0.0;
    const std::vector<Tier> fact{Tier::field_fact, Tier::both_fact, Tier::symmetric, Tier::gaussian_pulse,
                                 Tier::classical};
    for (const char* file : {"two_scatterers_scan.yaml", "hierarchy_n2.yaml"}) {
        RunConfig cfg = parse_config(std::string(MPXD_CONFIG_DIR) + "/" + file);
        cfg.integration.samples = 20000;
        const double e0 = cfg.field.e0;
        const auto a = compute_signals(build_problem(cfg), fact, cfg.integration);
        cfg.field.e0 = 1.7 * e0;
        const auto b = compute_signals(build_problem(cfg), fact, cfg.integration);
        const double factor = std::pow(1.7 * 1.7, cfg.n);
        for (std::size_t t = 0; t < fact.size(); ++t)
            for (std::size_t q = 0; q < a.grids[t].values.size(); ++q) {
                const double va = a.grids[t].values[q], vb = b.grids[t].values[q];
                if (va != 0.0) worst_scale = std::max(worst_scale, std::abs(vb / (factor * va) - 1.0));
            }
    }
    o.require(worst_scale <= 1e-12, "(E0^2)^n scaling within 1e-12");

    // Evenness of a centrosymmetric pattern.
    RunConfig sym = parse_config_text(symmetric_config, "<centrosymmetric>");
    const SignalProblem sp = build_problem(sym);
    const auto run = compute_signals(sp, {Tier::full, Tier::both_fact, Tier::classical}, sym.integration);
    double worst_z = 0.0, worst_classical = 0.0;
    for (const auto& g : run.grids) {
        const std::size_t m = g.values.size();
        for (std::size_t i = 0; i < m / 2; ++i) {
            const double a = g.values[i], b = g.values[m - 1 - i];
            if (g.tier == Tier::classical) {
                worst_classical = std::max(worst_classical, std::abs(a - b) / std::abs(a));
            } else {
                const double z = std::abs(a - b) / std::hypot(g.mc_stderr[i], g.mc_stderr[m - 1 - i]);
                worst_z = std::max(worst_z, z);
            }
        }
    }
    o.require(worst_classical <= 1e-12, "classical tier even in q");
    o.require(worst_z <= 3.0, "Monte Carlo tiers even within 3 stderr");

    // Byte-identical reruns, including across worker counts.
    sym.integration.samples = 50000;
    sym.integration.threads = 1;
    const std::vector<Tier> tiers{Tier::full, Tier::field_fact, Tier::both_fact, Tier::symmetric, Tier::classical};
    const std::string first = format_csv(compute_signals(build_problem(sym), tiers, sym.integration).grids);
    const std::string second = format_csv(compute_signals(build_problem(sym), tiers, sym.integration).grids);
    sym.integration.threads = 4;
    const std::string threaded = format_csv(compute_signals(build_problem(sym), tiers, sym.integration).grids);
    o.require(first == second, "byte-identical rerun");
    o.require(first == threaded, "byte-identical across thread counts");

    o.detail = "scaling max rel dev " + fmt("%.2e", worst_scale) + "; evenness classical " +
               fmt("%.1e", worst_classical) + ", MC max |z| " + fmt("%.2f", worst_z) + "; reruns sha256 " +
               sha256_hex(first).substr(0, 12) + (first == second && first == threaded ? " identical" : " DIFFER") +
               "; " + fmt("%.1f s", seconds_since(t0));
    return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
    {"combinatorial counts and exhaustive oracle", criterion_counts},
    {"golden expansion structure", criterion_goldens},
    {"Wick equivalence against the Fock-space oracle", criterion_wick},
    {"non-Gaussian single-photon witness", criterion_fock},
    {"classical-limit recovery at n=1", criterion_classical_limit},
    {"Gaussian pulse kernel transform", criterion_pulse_kernel},
    {"hierarchy convergence sweep", criterion_hierarchy_sweep},
    {"scaling, symmetry and determinism", criterion_scaling_symmetry},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
            return 2;
        }
    }
    if (only < 0 || only > int(criteria.size())) {
        std::fprintf(stderr, "criterion must be in 1..%zu\n", criteria.size());
        return 2;
    }
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only && int(i + 1) != only) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        all = all && o.pass;
        std::printf("criterion %zu: %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str());
        for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
