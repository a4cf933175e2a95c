// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

// mpxd command-line driver.
//
// Exit status: 0 success, 1 runtime failure, 2 configuration or usage error,
// 3 when a run finished but missed its target relative stderr.

#include "mpxd/combinatorics.hpp"
#include "mpxd/config.hpp"
#include "mpxd/fock_oracle.hpp"
#include "mpxd/output.hpp"
#include "mpxd/signal.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace mpxd;

constexpr int exit_runtime = 1;
constexpr int exit_config = 2;
constexpr int exit_budget = 3;

int report_error(const std::string& kind, const std::string& message, int code) {
    nlohmann::json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << "\n";
    return code;
}

struct SignalOptions {
    std::string config;
    std::string tier;
    std::string tiers;
    std::optional<std::uint64_t> seed;
    std::optional<long> samples;
    std::string out;
    std::string format;
};

RunConfig load(const SignalOptions& o) {
    RunConfig cfg = parse_config(o.config);
    if (!o.tier.empty() && !o.tiers.empty()) throw ConfigError("use either --tier or --tiers");
    try {
        if (!o.tier.empty()) cfg.tiers = {parse_tier(o.tier)};
        if (!o.tiers.empty()) cfg.tiers = parse_tier_list(o.tiers);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (o.seed) cfg.integration.rng_seed = *o.seed;
    if (o.samples) cfg.integration.samples = *o.samples;
    if (!o.out.empty()) cfg.output.path = o.out;
    if (!o.format.empty()) cfg.output.format = o.format;
    if (cfg.output.format != "csv" && cfg.output.format != "json")
        throw ConfigError("output format must be csv or json, got '" + cfg.output.format + "'");
    validate_config(cfg);
    cfg.resolved = dump_config(cfg);
    return cfg;
}

void emit(const std::string& path, const std::string& body) {
    if (path.empty())
        std::cout << body;
    else
        write_text_file(path, body);
}

ManifestInfo manifest_for(const std::string& command, const SignalOptions& o, const RunConfig& cfg,
                          const SignalRun& run, double wall) {
    ManifestInfo m;
    m.command = command;
    m.config_path = o.config;
    m.config_sha256 = sha256_hex(cfg.source);
    m.resolved_config = cfg.resolved;
    m.seed = cfg.integration.rng_seed;
    for (const auto& g : run.grids) {
        m.samples_per_point = std::max(m.samples_per_point, g.samples_per_point);
        m.strata = std::max(m.strata, g.strata);
        m.q_points = g.q_points.size();
        m.tiers.push_back(to_string(g.tier));
    }
    m.wall_time_s = wall;
    m.threads = resolve_thread_count(cfg.integration.threads);
    m.budget_exceeded = run.budget_exceeded;
    if (!cfg.output.path.empty()) m.outputs.push_back(cfg.output.path);
    return m;
}

int run_signal(const SignalOptions& o, bool hierarchy) {
    const RunConfig cfg = load(o);
    const SignalProblem problem = build_problem(cfg);
    const auto start = std::chrono::steady_clock::now();
    std::string body;
    SignalRun run;
    if (hierarchy) {
        HierarchyReport report = hierarchy_report(problem, cfg.tiers, cfg.integration);
        body = format_hierarchy_json(report, cfg.n);
        run = std::move(report.run);
    } else {
        run = compute_signals(problem, cfg.tiers, cfg.integration);
        body = cfg.output.format == "json" ? format_json(run.grids, cfg.n) : format_csv(run.grids);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(cfg.output.path, body);
    if (!cfg.output.path.empty())
        write_text_file(cfg.output.path + ".manifest.json",
                        format_manifest(manifest_for(hierarchy ? "hierarchy" : "signal", o, cfg,
                                                     run, wall)));
    if (run.budget_exceeded) {
        std::cerr << nlohmann::json{{"warning", "budget_exceeded"},
                                    {"message", "target relative stderr not reached"}}
                         .dump()
                  << "\n";
        return exit_budget;
    }
    return 0;
}

int run_enumerate(int n, const std::string& cls, const std::string& format, int n_max,
                  const std::string& out) {
    PairingClass c;
    try {
        c = parse_pairing_class(cls);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (format != "json" && format != "text") throw ConfigError("--format must be json or text");
    const PairingSet set = enumerate(c, n, n_max);
    emit(out, format == "json" ? serialize_json(set) : serialize_text(set));
    return 0;
}

int run_oracle(const std::string& state, int n, int configs, std::uint64_t seed,
               const std::string& out) {
    StateKind kind;
    if (state == "coherent")
        kind = StateKind::coherent;
    else if (state == "thermal")
        kind = StateKind::thermal;
    else if (state == "fock")
        kind = StateKind::fock;
    else
        throw ConfigError("--state must be coherent, thermal or fock");
    if (n < 1 || n > 3) throw ConfigError("--n must be 1, 2 or 3 for the oracle");
    if (configs < 1) throw ConfigError("--configs must be positive");
    const WickCheck w = wick_check(reference_state(kind), n, configs, seed);
    nlohmann::json j{{"state", state},
                     {"n", n},
                     {"configs", configs},
                     {"seed", seed},
                     {"max_rel_dev", w.max_rel_dev},
                     {"mean_ratio_factorized_over_oracle", w.mean_ratio},
                     {"max_abs_oracle", w.max_abs_oracle},
                     {"min_abs_factorized", w.min_abs_factorized},
                     {"max_cutoff", w.max_cutoff},
                     {"agrees_1e-9", w.max_rel_dev <= 1e-9}};
    emit(out, j.dump(2) + "\n");
    return 0;
}

int run_validate(const std::string& path) {
    const RunConfig cfg = parse_config(path);
    validate_config(cfg);
    build_problem(cfg);
    std::cout << dump_config(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mpxd: n-photon x-ray diffraction signals"};
    app.require_subcommand(1);
    app.set_version_flag("--version", MPXD_VERSION);

    int en_n = 1, en_nmax = default_n_max;
    std::string en_class = "g", en_format = "json", en_out;
    auto* en = app.add_subcommand("enumerate", "List pairing sets (m, w or g)");
    en->add_option("--n", en_n, "Photon order")->required();
    en->add_option("--class", en_class, "Pairing class: m, w or g");
    en->add_option("--format", en_format, "json or text");
    en->add_option("--n-max", en_nmax, "Largest order accepted");
    en->add_option("--out", en_out, "Output path (stdout when omitted)");

    SignalOptions sig;
    auto* sg = app.add_subcommand("signal", "Compute diffraction patterns");
    sg->add_option("--config", sig.config, "Run configuration (YAML)")->required();
    sg->add_option("--tier", sig.tier, "Single tier");
    sg->add_option("--tiers", sig.tiers, "Comma-separated tiers");
    sg->add_option("--seed", sig.seed, "Master RNG seed");
    sg->add_option("--samples", sig.samples, "Samples per q-point");
    sg->add_option("--out", sig.out, "Output path (stdout when omitted)");
    sg->add_option("--format", sig.format, "csv or json");

    SignalOptions hie;
    auto* hi = app.add_subcommand("hierarchy", "Tier-gap report against the first tier");
    hi->add_option("--config", hie.config, "Run configuration (YAML)")->required();
    hi->add_option("--tiers", hie.tiers, "Comma-separated tiers");
    hi->add_option("--seed", hie.seed, "Master RNG seed");
    hi->add_option("--samples", hie.samples, "Samples per q-point");
    hi->add_option("--out", hie.out, "Output path (stdout when omitted)");

    std::string or_state = "coherent", or_out;
    int or_n = 2, or_configs = 50;
    std::uint64_t or_seed = 1;
    auto* orc = app.add_subcommand("oracle", "Compare the Fock-space oracle with the pairing sum");
    orc->add_option("--state", or_state, "coherent, thermal or fock");
    orc->add_option("--n", or_n, "Photon order");
    orc->add_option("--configs", or_configs, "Random vertex configurations");
    orc->add_option("--seed", or_seed, "RNG seed");
    orc->add_option("--out", or_out, "Output path (stdout when omitted)");

    std::string va_config;
    auto* va = app.add_subcommand("validate", "Parse, validate and echo the resolved configuration");
    va->add_option("--config", va_config, "Run configuration (YAML)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), exit_config);
    }

    try {
        if (*en) return run_enumerate(en_n, en_class, en_format, en_nmax, en_out);
        if (*sg) return run_signal(sig, false);
        if (*hi) return run_signal(hie, true);
        if (*orc) return run_oracle(or_state, or_n, or_configs, or_seed, or_out);
        if (*va) return run_validate(va_config);
    } catch (const ConfigError& e) {
        return report_error("config", e.what(), exit_config);
    } catch (const std::exception& e) {
        return report_error("runtime", e.what(), exit_runtime);
    }
    return exit_runtime;
}
