// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/signal.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace mpxd {

// ---------------------------------------------------------------------------
// Enumerations
// ---------------------------------------------------------------------------

const char* to_string(Tier t) {
    switch (t) {
        case Tier::full: return "full";
        case Tier::field_fact: return "field_fact";
        case Tier::both_fact: return "both_fact";
        case Tier::symmetric: return "symmetric";
        case Tier::gaussian_pulse: return "gaussian_pulse";
        case Tier::classical: return "classical";
    }
    return "?";
}

Tier parse_tier(const std::string& text) {
    for (Tier t : {Tier::full, Tier::field_fact, Tier::both_fact, Tier::symmetric,
                   Tier::gaussian_pulse, Tier::classical})
        if (text == to_string(t)) return t;
    throw Error("unknown tier '" + text +
                "' (expected full, field_fact, both_fact, symmetric, gaussian_pulse or classical)");
}

std::vector<Tier> parse_tier_list(const std::string& text) {
    std::vector<Tier> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        const Tier t = parse_tier(item);
        if (std::find(out.begin(), out.end(), t) != out.end())
            throw Error("tier '" + item + "' listed twice");
        out.push_back(t);
    }
    if (out.empty()) throw Error("empty tier list");
    return out;
}

bool is_monte_carlo(Tier t) { return t != Tier::classical; }

const char* to_string(IntegrationMethod m) {
    return m == IntegrationMethod::monte_carlo ? "monte-carlo" : "tensor-grid";
}

IntegrationMethod parse_integration_method(const std::string& text) {
    if (text == "monte-carlo" || text == "monte_carlo" || text == "mc")
        return IntegrationMethod::monte_carlo;
    if (text == "tensor-grid" || text == "tensor_grid") return IntegrationMethod::tensor_grid;
    throw Error("unknown integration method '" + text + "' (expected monte-carlo or tensor-grid)");
}

void IntegrationConfig::validate() const {
    if (samples <= 0) throw Error("integration: samples must be > 0");
    if (batch_size <= 0) throw Error("integration: batch_size must be > 0");
    if (!(spatial_box.minCoeff() > 0.0)) throw Error("integration: spatial_box extents must be > 0");
    if (!(time_window >= 0.0)) throw Error("integration: time_window must be >= 0");
    if (grid_nodes < 1 || grid_nodes > 12) throw Error("integration: grid_nodes must be in 1..12");
    if (target_rel_stderr && !(*target_rel_stderr > 0.0))
        throw Error("integration: target_rel_stderr must be > 0");
}

void SignalProblem::validate() const {
    if (n < 1 || n > default_n_max) throw Error("signal: photon order n must be in 1..4");
    matter.validate();
    cumulant.validate();
    if (points.empty()) throw Error("signal: empty q-grid");
    for (const auto& p : points)
        if (p.detector.order() != n) throw Error("signal: pixel count must equal n");
}

const SignalGrid& SignalRun::grid(Tier t) const {
    for (const auto& g : grids)
        if (g.tier == t) return g;
    throw Error(std::string("signal run has no tier ") + to_string(t));
}

const TierDifference& SignalRun::difference(Tier a, Tier b) const {
    for (const auto& d : differences)
        if (d.a == a && d.b == b) return d;
    throw Error(std::string("signal run has no difference ") + to_string(a) + " - " + to_string(b));
}

int resolve_thread_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("MPXD_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min<long>(n, cap);
    }
    return n;
}

namespace {

// ---------------------------------------------------------------------------
// Running statistics
// ---------------------------------------------------------------------------

/// Mean vector and co-moment matrix of K jointly observed quantities.
struct Moments {
    long count = 0;
    std::vector<double> mean;
    std::vector<double> comoment;  // K×K, row-major

    explicit Moments(int k = 0) : mean(k, 0.0), comoment(std::size_t(k) * k, 0.0) {}
    int dim() const { return static_cast<int>(mean.size()); }

    void add(const double* x) {
        const int k = dim();
        ++count;
        std::array<double, 8> delta{};
        for (int i = 0; i < k; ++i) {
            delta[i] = x[i] - mean[i];
            mean[i] += delta[i] / double(count);
        }
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) comoment[i * k + j] += delta[i] * (x[j] - mean[j]);
    }

    /// Chan et al. pairwise combination.
    void merge(const Moments& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const int k = dim();
        const double na = double(count), nb = double(o.count), nt = na + nb;
        std::array<double, 8> delta{};
        for (int i = 0; i < k; ++i) delta[i] = o.mean[i] - mean[i];
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                comoment[i * k + j] += o.comoment[i * k + j] + delta[i] * delta[j] * na * nb / nt;
        for (int i = 0; i < k; ++i) mean[i] += delta[i] * nb / nt;
        count += o.count;
    }

    double covariance(int i, int j) const {
        return count > 1 ? comoment[i * dim() + j] / double(count - 1) : 0.0;
    }
};

/// Neumaier-compensated sum.
struct CompensatedSum {
    double sum = 0.0, c = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            c += (sum - t) + x;
        else
            c += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

// ---------------------------------------------------------------------------
// Quadrature nodes (Golub–Welsch)
// ---------------------------------------------------------------------------

struct Rule {
    std::vector<double> x, w;
};

Rule golub_welsch(int m, const std::vector<double>& offdiag, double mass) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) j(i, i + 1) = j(i + 1, i) = offdiag[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    Rule r;
    for (int i = 0; i < m; ++i) {
        r.x.push_back(es.eigenvalues()[i]);
        const double v0 = es.eigenvectors()(0, i);
        r.w.push_back(mass * v0 * v0);
    }
    return r;
}

/// Nodes and weights for E[f(z)], z ~ N(0, 1).
Rule gauss_hermite_probabilists(int m) {
    std::vector<double> off(std::max(m - 1, 0));
    for (int k = 1; k < m; ++k) off[k - 1] = std::sqrt(double(k));
    return golub_welsch(m, off, 1.0);
}

/// Nodes and weights for E[f(u)], u ~ U(−1, 1).
Rule gauss_legendre_uniform(int m) {
    std::vector<double> off(std::max(m - 1, 0));
    for (int k = 1; k < m; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    return golub_welsch(m, off, 1.0);
}

// ---------------------------------------------------------------------------
// Integrand
// ---------------------------------------------------------------------------

struct TierFlags {
    bool full = false, field = false, both = false, sym = false, pulse = false;
    std::vector<Tier> mc;  // slot order of the estimator vector
};

struct PointContext {
    ScatteredAssignment assign;
    std::vector<TransferKinematics> q;
    std::vector<double> slot_factor;  // w_j · pol_j / ω_j for the symmetric-type tiers
    cplx pol_total = 1.0;
    double delta_weight = 0.0;
    std::vector<double> kernel0, kernel1;  // τ̄ transforms per slot
};

class Integrand {
public:
    Integrand(const SignalProblem& p, const TierFlags& flags, const IntegrationConfig& integ)
        : p_(p), flags_(flags), n_(p.n), half_box_(0.5 * integ.spatial_box),
          wpairs_(enumerate_field_pairings(p.n)), gpairs_(enumerate_density_pairings(p.n)) {
        pulsed_ = p.field.pulsed();
        total_weight_ = p.matter.total_weight();
        if (pulsed_) {
            sigma_t_ = p.field.envelope.amplitude_sigma();
        } else {
            window_ = integ.time_window;
            if (!(window_ > 0.0))
                throw Error("integration: stationary (thermal) light needs time_window > 0");
        }
        t_center_ = p.field.envelope.t_center;
        for (const auto& pt : p.points) contexts_.push_back(make_context(pt));
    }

    int vertices() const { return 2 * n_; }
    int components() const { return static_cast<int>(p_.matter.centers.size()); }
    double component_probability(int c) const { return p_.matter.centers[c].weight / total_weight_; }
    bool pulsed() const { return pulsed_; }
    double sigma_t() const { return sigma_t_; }
    double window() const { return window_; }
    double t_center() const { return t_center_; }

    /// Importance density of vertex v's space-time point (mixture over components).
    double density(const SpaceTimePoint& x) const {
        return spatial_density(x.r) * time_density(x.t);
    }
    double spatial_density(const Vec3& r) const {
        return mean_density(p_.matter, r) / total_weight_;
    }
    double time_density(double t) const {
        if (!pulsed_) return std::abs(t - t_center_) <= 0.5 * window_ ? 1.0 / window_ : 0.0;
        const double z = (t - t_center_) / sigma_t_;
        return std::exp(-0.5 * z * z) / (sigma_t_ * std::sqrt(2.0 * M_PI));
    }

    /// Writes one estimator per MC tier into `out` (real part of f/p).
    void evaluate(std::size_t point, const VertexConfiguration& v, double* out) const {
        const std::size_t k = flags_.mc.size();
        for (const auto& x : v.primed)
            if (!inside(x.r)) return std::fill(out, out + k, 0.0);
        for (const auto& x : v.doubleprimed)
            if (!inside(x.r)) return std::fill(out, out + k, 0.0);

        const PointContext& ctx = contexts_[point];
        const DetectionConfig& det = p_.points[point].detector;

        double p_r = 1.0, p_t = 1.0;
        for (int j = 0; j < n_; ++j) {
            p_r *= spatial_density(v.primed[j].r) * spatial_density(v.doubleprimed[j].r);
            p_t *= time_density(v.primed[j].t) * time_density(v.doubleprimed[j].t);
        }
        const double p_full = p_r * p_t;

        cplx ds = 0.0, dp_w = 0.0, dp_x = 0.0;
        double k_full = 0.0, k_fact = 0.0;
        if (flags_.full || flags_.field || flags_.both) {
            ds = ds_n(det, v, ctx.assign) * ctx.pol_total;
            if (flags_.field || flags_.both) dp_w = dp_n_factorized(p_.field, v, wpairs_);
            if (flags_.full) dp_x = dp_n_exact(p_.field, v);
            if (flags_.full || flags_.field) k_full = k_n(p_.matter, p_.cumulant, v, gpairs_, DensityMode::full);
            if (flags_.both) k_fact = k_n(p_.matter, p_.cumulant, v, gpairs_, DensityMode::factorized);
        }

        for (std::size_t i = 0; i < k; ++i) {
            double val = 0.0;
            switch (flags_.mc[i]) {
                case Tier::full: val = (ds * k_full * dp_x).real() / p_full; break;
                case Tier::field_fact: val = (ds * k_full * dp_w).real() / p_full; break;
                case Tier::both_fact: val = (ds * k_fact * dp_w).real() / p_full; break;
                case Tier::symmetric: val = symmetric(ctx, v) / p_full; break;
                case Tier::gaussian_pulse: val = gaussian_pulse(ctx, v) / p_r; break;
                case Tier::classical: break;
            }
            out[i] = val;
        }
    }

    const PointContext& context(std::size_t i) const { return contexts_[i]; }

private:
    bool inside(const Vec3& r) const { return (r.cwiseAbs() - half_box_).maxCoeff() <= 0.0; }

    PointContext make_context(const PatternPoint& pt) const {
        PointContext c;
        c.assign = identity_assignment(pt.detector);
        const Mode& pump = p_.field.carrier;
        for (int j = 0; j < n_; ++j) {
            const Mode& sp = c.assign.primed[j];
            const Mode& spp = c.assign.doubleprimed[j];
            // Eigen's dot conjugates its left operand.
            const cplx pol_p = pump.eps().dot(sp.eps());   // ε_s · ε_p*
            const cplx pol_pp = spp.eps().dot(pump.eps()); // ε_s* · ε_p
            c.pol_total *= pol_p * pol_pp;
            c.q.push_back(make_transfer(pump, sp));
            const double w = pt.detector.pixels[j].solid_angle_weight;
            c.slot_factor.push_back(w * (pol_p * pol_pp).real() / sp.omega());
        }
        c.delta_weight = delta_contraction_weights(pt.detector, c.assign);
        if (flags_.pulse) {
            const double g = p_.field.gamma_effective();
            const double tc = p_.matter.tau_coh;
            for (int j = 0; j < n_; ++j) {
                c.kernel0.push_back(pulse_kernel_transform_numeric(c.q[j].omega_tilde, g));
                c.kernel1.push_back(
                    p_.matter.fluct_amplitude > 0.0
                        ? pulse_kernel_transform_numeric(c.q[j].omega_tilde, g + 0.5 / (tc * tc))
                        : 0.0);
            }
        }
        return c;
    }

    double symmetric(const PointContext& ctx, const VertexConfiguration& v) const {
        if (ctx.delta_weight == 0.0) return 0.0;
        cplx prod = ctx.delta_weight;
        for (int j = 0; j < n_; ++j) {
            const auto& a = v.primed[j];
            const auto& b = v.doubleprimed[j];
            const double t_bar = 0.5 * (a.t + b.t), tau_bar = b.t - a.t;
            prod *= ctx.slot_factor[j] * k01(p_.matter, a, b) *
                    intensity(p_.field, p_.field.envelope.r0, tau_bar, t_bar) *
                    phase_factor(ctx.q[j], a, Branch::primed) *
                    phase_factor(ctx.q[j], b, Branch::doubleprimed);
        }
        return prod.real();
    }

    double gaussian_pulse(const PointContext& ctx, const VertexConfiguration& v) const {
        if (ctx.delta_weight == 0.0) return 0.0;
        const double fluence = pulse_fluence(p_.field);
        const double f = p_.matter.fluct_amplitude;
        const double xi = p_.matter.xi;
        cplx prod = ctx.delta_weight;
        for (int j = 0; j < n_; ++j) {
            const Vec3& ra = v.primed[j].r;
            const Vec3& rb = v.doubleprimed[j].r;
            double kernel = ctx.kernel0[j];
            if (f > 0.0)
                kernel += f * std::exp(-(ra - rb).squaredNorm() / (2.0 * xi * xi)) * ctx.kernel1[j];
            prod *= ctx.slot_factor[j] * mean_density(p_.matter, ra) * mean_density(p_.matter, rb) *
                    kernel * fluence * std::polar(1.0, -ctx.q[j].q_tilde.dot(ra - rb));
        }
        return prod.real();
    }

    const SignalProblem& p_;
    const TierFlags& flags_;
    int n_;
    Vec3 half_box_;
    PairingSet wpairs_, gpairs_;
    std::vector<PointContext> contexts_;
    bool pulsed_ = true;
    double total_weight_ = 1.0;
    double sigma_t_ = 1.0, window_ = 0.0, t_center_ = 0.0;
};

// ---------------------------------------------------------------------------
// Sampling plan
// ---------------------------------------------------------------------------

constexpr long max_strata = 4096;

struct Stratum {
    std::vector<int> components;  // per vertex; empty → draw from the mixture
    double weight = 1.0;
    long samples = 0;
};

std::vector<Stratum> build_strata(const Integrand& f, long samples) {
    const int nv = f.vertices();
    const int c = f.components();
    const double count = std::pow(double(c), nv);
    std::vector<Stratum> out;
    if (count > double(max_strata)) {
        out.push_back({{}, 1.0, samples});
        return out;
    }
    const long total = static_cast<long>(count);
    for (long s = 0; s < total; ++s) {
        Stratum st;
        long rest = s;
        for (int v = 0; v < nv; ++v) {
            const int comp = int(rest % c);
            rest /= c;
            st.components.push_back(comp);
            st.weight *= f.component_probability(comp);
        }
        st.samples = std::max<long>(2, std::llround(double(samples) * st.weight));
        out.push_back(std::move(st));
    }
    return out;
}

struct Job {
    std::size_t point;
    std::size_t stratum;
    long samples;
    std::uint64_t index;  // global batch index, seeds the stream
};

class VertexDrawer {
public:
    VertexDrawer(const Integrand& f, const MatterModel& m) : f_(f), m_(m) {
        std::vector<double> w;
        for (const auto& c : m.centers) w.push_back(c.weight);
        mixture_ = std::discrete_distribution<int>(w.begin(), w.end());
    }

    template <class Rng>
    void draw(Rng& rng, const Stratum& s, VertexConfiguration& v) {
        const int n = static_cast<int>(v.primed.size());
        for (int vtx = 0; vtx < 2 * n; ++vtx) {
            const int comp = s.components.empty() ? mixture_(rng) : s.components[vtx];
            const double sig = m_.sigma(comp);
            SpaceTimePoint& x = vtx < n ? v.primed[vtx] : v.doubleprimed[vtx - n];
            x.r = m_.centers[comp].position +
                  sig * Vec3(normal_(rng), normal_(rng), normal_(rng));
            if (f_.pulsed())
                x.t = f_.t_center() + f_.sigma_t() * normal_(rng);
            else
                x.t = f_.t_center() + f_.window() * (uniform_(rng) - 0.5);
        }
    }

private:
    const Integrand& f_;
    const MatterModel& m_;
    std::discrete_distribution<int> mixture_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::mt19937_64 batch_engine(std::uint64_t master, std::uint64_t index) {
    const std::uint64_t key = master ^ index;
    std::seed_seq seq{std::uint32_t(key & 0xffffffffu), std::uint32_t(key >> 32)};
    return std::mt19937_64(seq);
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    threads = std::max(1, std::min<int>(threads, int(count)));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct PointEstimate {
    std::vector<double> value;       // per MC tier
    std::vector<double> covariance;  // K×K
};

std::vector<PointEstimate> run_monte_carlo(const SignalProblem& p, const Integrand& f,
                                           const TierFlags& flags,
                                           const IntegrationConfig& integ, long& strata_count) {
    const int k = static_cast<int>(flags.mc.size());
    const auto strata = build_strata(f, integ.samples);
    strata_count = static_cast<long>(strata.size());

    std::vector<Job> jobs;
    std::uint64_t index = 0;
    for (std::size_t q = 0; q < p.points.size(); ++q)
        for (std::size_t s = 0; s < strata.size(); ++s)
            for (long done = 0; done < strata[s].samples; done += integ.batch_size)
                jobs.push_back({q, s, std::min(integ.batch_size, strata[s].samples - done), index++});

    std::vector<Moments> results(jobs.size(), Moments(k));
    parallel_for(jobs.size(), resolve_thread_count(integ.threads), [&](std::size_t i) {
        const Job& job = jobs[i];
        auto rng = batch_engine(integ.rng_seed, job.index);
        VertexDrawer drawer(f, p.matter);
        VertexConfiguration v(std::vector<SpaceTimePoint>(p.n), std::vector<SpaceTimePoint>(p.n));
        std::array<double, 8> x{};
        Moments m(k);
        for (long s = 0; s < job.samples; ++s) {
            drawer.draw(rng, strata[job.stratum], v);
            f.evaluate(job.point, v, x.data());
            m.add(x.data());
        }
        results[i] = std::move(m);
    });

    // Deterministic reduction: batches merge in job order regardless of thread count.
    std::vector<PointEstimate> out(p.points.size());
    std::vector<std::vector<Moments>> per(p.points.size(),
                                          std::vector<Moments>(strata.size(), Moments(k)));
    for (std::size_t i = 0; i < jobs.size(); ++i) per[jobs[i].point][jobs[i].stratum].merge(results[i]);
    for (std::size_t q = 0; q < p.points.size(); ++q) {
        std::vector<CompensatedSum> val(k), cov(std::size_t(k) * k);
        for (std::size_t s = 0; s < strata.size(); ++s) {
            const Moments& m = per[q][s];
            const double w = strata[s].weight;
            for (int a = 0; a < k; ++a) {
                val[a].add(w * m.mean[a]);
                for (int b = 0; b < k; ++b)
                    cov[a * k + b].add(w * w * m.covariance(a, b) / double(m.count));
            }
        }
        out[q].value.resize(k);
        out[q].covariance.resize(std::size_t(k) * k);
        for (int a = 0; a < k; ++a) out[q].value[a] = val[a].value();
        for (int a = 0; a < k * k; ++a) out[q].covariance[a] = cov[a].value();
    }
    return out;
}

std::vector<PointEstimate> run_tensor_grid(const SignalProblem& p, const Integrand& f,
                                           const TierFlags& flags,
                                           const IntegrationConfig& integ, long& strata_count,
                                           long& nodes_per_point) {
    if (p.n != 1) throw Error("integration: tensor-grid quadrature is available for n = 1 only");
    const int k = static_cast<int>(flags.mc.size());
    const int m = integ.grid_nodes;
    const Rule gh = gauss_hermite_probabilists(m);
    const Rule gl = gauss_legendre_uniform(m);
    const Rule& tr = f.pulsed() ? gh : gl;

    const int c = f.components();
    strata_count = long(c) * c;
    long dims_total = 1;
    for (int d = 0; d < 8; ++d) dims_total *= m;
    nodes_per_point = dims_total * strata_count;

    std::vector<PointEstimate> out(p.points.size());
    parallel_for(p.points.size(), resolve_thread_count(integ.threads), [&](std::size_t q) {
        std::vector<CompensatedSum> acc(k);
        VertexConfiguration v({SpaceTimePoint()}, {SpaceTimePoint()});
        std::array<double, 8> x{};
        std::array<int, 8> idx{};
        for (int ca = 0; ca < c; ++ca)
            for (int cb = 0; cb < c; ++cb) {
                const double sw = f.component_probability(ca) * f.component_probability(cb);
                const double sa = p.matter.sigma(ca), sb = p.matter.sigma(cb);
                const Vec3& ra = p.matter.centers[ca].position;
                const Vec3& rb = p.matter.centers[cb].position;
                for (long flat = 0; flat < dims_total; ++flat) {
                    long rest = flat;
                    double w = sw;
                    for (int d = 0; d < 8; ++d) {
                        idx[d] = int(rest % m);
                        rest /= m;
                        w *= (d == 3 || d == 7) ? tr.w[idx[d]] : gh.w[idx[d]];
                    }
                    auto time_of = [&](int i) {
                        return f.pulsed() ? f.t_center() + f.sigma_t() * tr.x[i]
                                          : f.t_center() + 0.5 * f.window() * tr.x[i];
                    };
                    v.primed[0].r = ra + sa * Vec3(gh.x[idx[0]], gh.x[idx[1]], gh.x[idx[2]]);
                    v.primed[0].t = time_of(idx[3]);
                    v.doubleprimed[0].r = rb + sb * Vec3(gh.x[idx[4]], gh.x[idx[5]], gh.x[idx[6]]);
                    v.doubleprimed[0].t = time_of(idx[7]);
                    f.evaluate(q, v, x.data());
                    for (int a = 0; a < k; ++a) acc[a].add(w * x[a]);
                }
            }
        out[q].value.resize(k);
        out[q].covariance.assign(std::size_t(k) * k, 0.0);
        for (int a = 0; a < k; ++a) out[q].value[a] = acc[a].value();
    });
    return out;
}

double classical_value(const SignalProblem& p, const PatternPoint& pt) {
    const Mode& pump = p.field.carrier;
    const double g = p.field.gamma_effective();
    const double fluence = pulse_fluence(p.field);
    const auto assign = identity_assignment(pt.detector);
    double prod = 1.0;
    for (int j = 0; j < p.n; ++j) {
        const Mode& s = assign.primed[j];
        const double pol = std::norm(pump.eps().dot(s.eps()));
        const double w = pt.detector.pixels[j].solid_angle_weight;
        const auto q = make_transfer(pump, s);
        prod *= (w * pol / s.omega()) * std::sqrt(M_PI / g) * fluence *
                std::norm(form_factor(p.matter, q.q_tilde));
    }
    return prod;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

SignalRun compute_signals(const SignalProblem& input, const std::vector<Tier>& tiers,
                          const IntegrationConfig& integ) {
    input.validate();
    // Every field model is homogeneous of degree n in E0², so the integrands are
    // evaluated at unit amplitude and the intensity is applied once at the end.
    SignalProblem unit = input;
    unit.field.e0 = 1.0;
    const SignalProblem& problem = unit;
    const double intensity = std::pow(input.field.e0 * input.field.e0, input.n);

    integ.validate();
    if (tiers.empty()) throw Error("signal: no tiers requested");

    TierFlags flags;
    for (Tier t : tiers) {
        if (t == Tier::full && problem.n > 3) throw Error("signal: full tier requires n <= 3");
        if ((t == Tier::gaussian_pulse || t == Tier::classical) && !problem.field.pulsed())
            throw Error(std::string("signal: tier ") + to_string(t) +
                        " needs a pulsed (coherent or gaussian-schell) field");
        if (!is_monte_carlo(t)) continue;
        flags.mc.push_back(t);
        flags.full |= t == Tier::full;
        flags.field |= t == Tier::field_fact;
        flags.both |= t == Tier::both_fact;
        flags.sym |= t == Tier::symmetric;
        flags.pulse |= t == Tier::gaussian_pulse;
    }

    const double prefactor = problem.units.signal_prefactor(problem.n);
    std::vector<PointEstimate> est;
    long strata = 0, samples_per_point = 0;
    if (!flags.mc.empty() && problem.matter.total_weight() == 0.0) {
        // No electrons: every integrand vanishes identically.
        const std::size_t k = flags.mc.size();
        est.assign(problem.points.size(), PointEstimate{std::vector<double>(k, 0.0),
                                                        std::vector<double>(k * k, 0.0)});
    } else if (!flags.mc.empty()) {
        const Integrand f(problem, flags, integ);
        if (integ.method == IntegrationMethod::monte_carlo) {
            est = run_monte_carlo(problem, f, flags, integ, strata);
            for (const auto& s : build_strata(f, integ.samples)) samples_per_point += s.samples;
        } else {
            est = run_tensor_grid(problem, f, flags, integ, strata, samples_per_point);
        }
    }

    SignalRun run;
    for (Tier t : tiers) {
        SignalGrid g;
        g.tier = t;
        g.prefactor = prefactor;
        for (const auto& pt : problem.points) g.q_points.push_back(pt.q);
        const auto slot = std::find(flags.mc.begin(), flags.mc.end(), t);
        const int k = static_cast<int>(flags.mc.size());
        for (std::size_t q = 0; q < problem.points.size(); ++q) {
            double v = 0.0, e = 0.0;
            if (slot == flags.mc.end()) {
                v = intensity * classical_value(problem, problem.points[q]);
            } else {
                const int a = int(slot - flags.mc.begin());
                v = intensity * est[q].value[a];
                e = intensity * std::sqrt(std::max(0.0, est[q].covariance[a * k + a]));
            }
            g.values.push_back(v);
            g.mc_stderr.push_back(e);
            g.raw_values.push_back(v * prefactor);
            if (integ.target_rel_stderr && e > *integ.target_rel_stderr * std::abs(v))
                g.budget_exceeded = true;
        }
        if (slot != flags.mc.end()) {
            g.samples_per_point = samples_per_point;
            g.strata = strata;
        }
        run.budget_exceeded |= g.budget_exceeded;
        run.grids.push_back(std::move(g));
    }

    // Pairwise differences on shared samples.
    const int k = static_cast<int>(flags.mc.size());
    for (std::size_t i = 0; i < tiers.size(); ++i)
        for (std::size_t j = 0; j < tiers.size(); ++j) {
            if (i == j) continue;
            TierDifference d{tiers[i], tiers[j], {}, {}};
            const auto si = std::find(flags.mc.begin(), flags.mc.end(), tiers[i]);
            const auto sj = std::find(flags.mc.begin(), flags.mc.end(), tiers[j]);
            for (std::size_t q = 0; q < problem.points.size(); ++q) {
                d.diff.push_back(run.grids[i].values[q] - run.grids[j].values[q]);
                double var = 0.0;
                const bool mi = si != flags.mc.end(), mj = sj != flags.mc.end();
                const int a = int(si - flags.mc.begin()), b = int(sj - flags.mc.begin());
                if (mi) var += est[q].covariance[a * k + a];
                if (mj) var += est[q].covariance[b * k + b];
                if (mi && mj) var -= 2.0 * est[q].covariance[a * k + b];
                d.diff_stderr.push_back(intensity * std::sqrt(std::max(0.0, var)));
            }
            run.differences.push_back(std::move(d));
        }
    return run;
}

SignalGrid signal_full(const SignalProblem& p, const IntegrationConfig& integ) {
    return compute_signals(p, {Tier::full}, integ).grids.front();
}
SignalGrid signal_field_factorized(const SignalProblem& p, const IntegrationConfig& integ) {
    return compute_signals(p, {Tier::field_fact}, integ).grids.front();
}
SignalGrid signal_both_factorized(const SignalProblem& p, const IntegrationConfig& integ) {
    return compute_signals(p, {Tier::both_fact}, integ).grids.front();
}
SignalGrid signal_symmetric(const SignalProblem& p, const IntegrationConfig& integ) {
    return compute_signals(p, {Tier::symmetric}, integ).grids.front();
}
SignalGrid signal_gaussian_pulse(const SignalProblem& p, const IntegrationConfig& integ) {
    return compute_signals(p, {Tier::gaussian_pulse}, integ).grids.front();
}
SignalGrid signal_classical(const SignalProblem& p) {
    return compute_signals(p, {Tier::classical}, IntegrationConfig{}).grids.front();
}

HierarchyReport hierarchy_report(const SignalProblem& p, const std::vector<Tier>& tiers,
                                 const IntegrationConfig& integ) {
    HierarchyReport rep{tiers.front(), compute_signals(p, tiers, integ), {}};
    const SignalGrid& ref = rep.run.grids.front();
    double ref_norm2 = 0.0;
    for (double v : ref.values) ref_norm2 += v * v;
    const double ref_norm = std::sqrt(ref_norm2);
    for (std::size_t i = 1; i < tiers.size(); ++i) {
        const TierDifference& d = rep.run.difference(tiers[i], rep.reference);
        TierGap gap{tiers[i], {}, 0.0, 0.0};
        double d2 = 0.0, s2 = 0.0, ds2 = 0.0;
        for (std::size_t q = 0; q < d.diff.size(); ++q) {
            const double r = ref.values[q];
            gap.rel_dev.push_back(r != 0.0 ? d.diff[q] / std::abs(r) : 0.0);
            d2 += d.diff[q] * d.diff[q];
            s2 += d.diff_stderr[q] * d.diff_stderr[q];
            ds2 += d.diff[q] * d.diff[q] * d.diff_stderr[q] * d.diff_stderr[q];
        }
        if (ref_norm > 0.0) {
            const double dn = std::sqrt(d2);
            gap.l2_gap = dn / ref_norm;
            gap.l2_gap_stderr = (dn > 0.0 ? std::sqrt(ds2) / dn : std::sqrt(s2)) / ref_norm;
        }
        rep.gaps.push_back(std::move(gap));
    }
    return rep;
}

}  // namespace mpxd
