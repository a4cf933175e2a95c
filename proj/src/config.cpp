// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mpxd {

std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& c : candidates) {
        std::vector<std::size_t> prev(c.size() + 1), cur(c.size() + 1);
        for (std::size_t j = 0; j <= c.size(); ++j) prev[j] = j;
        for (std::size_t i = 1; i <= key.size(); ++i) {
            cur[0] = i;
            for (std::size_t j = 1; j <= c.size(); ++j)
                cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                                   prev[j - 1] + (key[i - 1] == c[j - 1] ? 0 : 1)});
            std::swap(prev, cur);
        }
        if (prev[c.size()] < best_d) {
            best_d = prev[c.size()];
            best = c;
        }
    }
    // Suggestions further away than half the key length are noise.
    if (best_d > std::max<std::size_t>(2, key.size() / 2)) return "";
    return best;
}

namespace {

class Section {
public:
    Section(YAML::Node node, std::string path, std::string origin, std::vector<std::string> keys)
        : node_(std::move(node)), path_(std::move(path)), origin_(std::move(origin)),
          keys_(std::move(keys)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, "must be a mapping");
        if (!node_ || node_.IsNull()) return;
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (std::find(keys_.begin(), keys_.end(), k) == keys_.end()) {
                std::ostringstream os;
                os << "unknown key '" << qualified(k) << "'";
                const std::string near = nearest_key(k, keys_);
                if (!near.empty()) os << " (nearest valid key: '" << qualified(near) << "')";
                fail(kv.first, os.str());
            }
        }
    }

    bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }
    YAML::Node raw(const std::string& key) const { return has(key) ? node_[key] : YAML::Node(); }

    template <class T>
    T get(const std::string& key, const T& fallback) const {
        if (!has(key)) return fallback;
        const YAML::Node v = node_[key];
        try {
            return v.as<T>();
        } catch (const YAML::Exception&) {
            fail(v, "key '" + qualified(key) + "' has the wrong type");
        }
    }

    Vec3 vec3(const std::string& key, const Vec3& fallback) const {
        if (!has(key)) return fallback;
        return to_vec3(node_[key], qualified(key));
    }

    Vec3 to_vec3(const YAML::Node& v, const std::string& what) const {
        if (!v.IsSequence() || v.size() != 3) fail(v, "key '" + what + "' must be a 3-vector");
        Vec3 out;
        try {
            for (int i = 0; i < 3; ++i) out[i] = v[i].as<double>();
        } catch (const YAML::Exception&) {
            fail(v, "key '" + what + "' must contain numbers");
        }
        return out;
    }

    [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
        std::ostringstream os;
        os << origin_;
        if (at.Mark().line >= 0) os << ":" << at.Mark().line + 1;
        os << ": " << msg;
        throw ConfigError(os.str());
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const std::string& origin() const { return origin_; }

private:
    YAML::Node node_;
    std::string path_, origin_;
    std::vector<std::string> keys_;
};

void emit_vec(YAML::Emitter& e, const Vec3& v) {
    e << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << v.z() << YAML::EndSeq;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << origin << ":" << e.mark.line + 1 << ": parse error: " << e.msg;
        throw ConfigError(os.str());
    }
    RunConfig cfg;
    cfg.source = text;
    Section top(root, "", origin,
                {"schema_version", "n", "n_max", "tiers", "field", "matter", "detector", "scan",
                 "integration", "units", "output"});
    if (!top.has("schema_version")) throw ConfigError(origin + ": missing required key 'schema_version'");
    const int version = top.get<int>("schema_version", 0);
    if (version != schema_version)
        top.fail(top.raw("schema_version"),
                 "unsupported schema_version " + std::to_string(version) + " (expected " +
                     std::to_string(schema_version) + ")");
    cfg.n = top.get<int>("n", 1);
    cfg.n_max = top.get<int>("n_max", default_n_max);
    if (top.has("tiers")) {
        const YAML::Node t = top.raw("tiers");
        try {
            if (t.IsSequence()) {
                std::string joined;
                for (const auto& item : t) joined += item.as<std::string>() + ",";
                cfg.tiers = parse_tier_list(joined);
            } else {
                cfg.tiers = parse_tier_list(t.as<std::string>());
            }
        } catch (const YAML::Exception&) {
            top.fail(t, "key 'tiers' must be a list of tier names");
        } catch (const Error& e) {
            top.fail(t, e.what());
        }
    }

    // field
    {
        Section s(top.raw("field"), "field", origin,
                  {"variant", "e0", "photon_energy_kev", "direction", "mu", "tau0_fs", "tau0",
                   "t_center", "r0", "xi_t", "tau_c"});
        FieldBlock& f = cfg.field;
        try {
            f.variant = parse_field_variant(s.get<std::string>("variant", "coherent"));
        } catch (const Error& e) {
            s.fail(s.raw("variant"), e.what());
        }
        f.e0 = s.get<double>("e0", f.e0);
        f.photon_energy_kev = s.get<double>("photon_energy_kev", f.photon_energy_kev);
        f.direction = s.vec3("direction", f.direction);
        f.mu = s.get<int>("mu", f.mu);
        if (s.has("tau0_fs") && s.has("tau0"))
            s.fail(s.raw("tau0"), "give either 'field.tau0_fs' or 'field.tau0', not both");
        if (s.has("tau0_fs")) f.tau0 = units::fs_to_au(s.get<double>("tau0_fs", 1.0));
        f.tau0 = s.get<double>("tau0", f.tau0);
        f.t_center = s.get<double>("t_center", f.t_center);
        f.r0 = s.vec3("r0", f.r0);
        f.xi_t = s.get<double>("xi_t", f.xi_t);
        f.tau_c = s.get<double>("tau_c", f.tau_c);
    }

    // matter
    {
        Section s(top.raw("matter"), "matter", origin,
                  {"variant", "centers", "xi", "tau_coh", "fluct_amplitude", "aux_scale",
                   "cross_scale", "point_width"});
        MatterModel& m = cfg.matter;
        try {
            m.variant = parse_matter_variant(s.get<std::string>("variant", "point-scatterers"));
        } catch (const Error& e) {
            s.fail(s.raw("variant"), e.what());
        }
        if (!s.has("centers")) throw ConfigError(origin + ": missing required key 'matter.centers'");
        const YAML::Node centers = s.raw("centers");
        if (!centers.IsSequence()) s.fail(centers, "key 'matter.centers' must be a list");
        for (const auto& c : centers) {
            if (!c.IsSequence() || c.size() < 4 || c.size() > 5)
                s.fail(c, "each matter center must be [x, y, z, weight] or [x, y, z, weight, width]");
            DensityCenter dc;
            try {
                dc.position = Vec3(c[0].as<double>(), c[1].as<double>(), c[2].as<double>());
                dc.weight = c[3].as<double>();
                if (c.size() == 5) dc.width = c[4].as<double>();
            } catch (const YAML::Exception&) {
                s.fail(c, "matter center entries must be numbers");
            }
            m.centers.push_back(dc);
        }
        m.xi = s.get<double>("xi", m.xi);
        m.tau_coh = s.get<double>("tau_coh", m.tau_coh);
        m.fluct_amplitude = s.get<double>("fluct_amplitude", m.fluct_amplitude);
        m.point_width = s.get<double>("point_width", m.point_width);
        cfg.cumulant.xi = m.xi;
        cfg.cumulant.tau_coh = m.tau_coh;
        cfg.cumulant.aux_scale = s.get<double>("aux_scale", cfg.cumulant.aux_scale);
        cfg.cumulant.cross_scale = s.get<double>("cross_scale", cfg.cumulant.cross_scale);
    }

    // detector
    {
        Section s(top.raw("detector"), "detector", origin, {"energy_kev", "equal_time", "pixels"});
        DetectorBlock& d = cfg.detector;
        if (s.has("energy_kev")) d.energy_kev = s.get<double>("energy_kev", 0.0);
        d.equal_time = s.get<bool>("equal_time", true);
        if (!s.has("pixels")) throw ConfigError(origin + ": missing required key 'detector.pixels'");
        const YAML::Node pixels = s.raw("pixels");
        if (!pixels.IsSequence()) s.fail(pixels, "key 'detector.pixels' must be a list");
        for (const auto& p : pixels) {
            Section ps(p, "detector.pixels[]", origin, {"direction", "mu", "weight"});
            PixelBlock pb;
            pb.direction = ps.vec3("direction", pb.direction);
            pb.mu = ps.get<int>("mu", pb.mu);
            pb.weight = ps.get<double>("weight", pb.weight);
            d.pixels.push_back(pb);
        }
    }

    // scan
    if (top.has("scan")) {
        Section s(top.raw("scan"), "scan", origin,
                  {"slot", "axis", "s_min", "s_max", "points", "directions"});
        ScanBlock& sc = cfg.scan;
        sc.enabled = true;
        sc.slot = s.get<int>("slot", 1);
        if (s.has("directions")) {
            if (s.has("axis") || s.has("points"))
                s.fail(s.raw("directions"), "give either 'scan.directions' or an axis scan, not both");
            const YAML::Node dirs = s.raw("directions");
            if (!dirs.IsSequence()) s.fail(dirs, "key 'scan.directions' must be a list");
            for (const auto& d : dirs) sc.directions.push_back(s.to_vec3(d, "scan.directions[]"));
        } else {
            sc.axis = s.vec3("axis", sc.axis);
            sc.s_min = s.get<double>("s_min", 0.0);
            sc.s_max = s.get<double>("s_max", 0.0);
            sc.points = s.get<int>("points", 1);
        }
    }

    // integration
    {
        Section s(top.raw("integration"), "integration", origin,
                  {"method", "samples", "seed", "batch_size", "spatial_box", "time_window",
                   "grid_nodes", "threads", "target_rel_stderr"});
        IntegrationConfig& ic = cfg.integration;
        try {
            ic.method = parse_integration_method(s.get<std::string>("method", "monte-carlo"));
        } catch (const Error& e) {
            s.fail(s.raw("method"), e.what());
        }
        ic.samples = s.get<long>("samples", ic.samples);
        ic.rng_seed = s.get<std::uint64_t>("seed", ic.rng_seed);
        ic.batch_size = s.get<long>("batch_size", ic.batch_size);
        ic.spatial_box = s.vec3("spatial_box", ic.spatial_box);
        ic.time_window = s.get<double>("time_window", ic.time_window);
        ic.grid_nodes = s.get<int>("grid_nodes", ic.grid_nodes);
        ic.threads = s.get<int>("threads", ic.threads);
        if (s.has("target_rel_stderr")) ic.target_rel_stderr = s.get<double>("target_rel_stderr", 0.0);
    }

    // units
    {
        Section s(top.raw("units"), "units", origin, {"volume"});
        cfg.volume = s.get<double>("volume", cfg.volume);
    }

    // output
    {
        Section s(top.raw("output"), "output", origin, {"path", "format"});
        cfg.output.path = s.get<std::string>("path", "");
        cfg.output.format = s.get<std::string>("format", "csv");
    }

    validate_config(cfg);
    cfg.resolved = dump_config(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void validate_config(const RunConfig& cfg) {
    auto bad = [](const std::string& msg) { throw ConfigError("invalid config: " + msg); };
    if (cfg.n < 1) bad("n must be >= 1");
    if (cfg.n > cfg.n_max) bad("n exceeds n_max (" + std::to_string(cfg.n_max) + ")");
    if (static_cast<int>(cfg.detector.pixels.size()) != cfg.n) bad("pixel count must equal n");
    for (Tier t : cfg.tiers) {
        if (t == Tier::full && cfg.n > 3) bad("tier full requires n <= 3");
        if ((t == Tier::gaussian_pulse || t == Tier::classical) &&
            cfg.field.variant == FieldVariant::thermal)
            bad(std::string("tier ") + to_string(t) + " needs a pulsed field, not thermal");
    }
    if (!(cfg.field.photon_energy_kev > 0.0)) bad("field.photon_energy_kev must be > 0");
    if (!(cfg.field.e0 >= 0.0)) bad("field.e0 must be >= 0");
    if (cfg.field.mu != 0 && cfg.field.mu != 1) bad("field.mu must be 0 or 1");
    if (!(cfg.field.tau0 > 0.0)) bad("field.tau0 must be > 0");
    if (cfg.field.variant == FieldVariant::gaussian_schell &&
        (!(cfg.field.xi_t > 0.0) || !(cfg.field.tau_c > 0.0)))
        bad("gaussian-schell field needs xi_t > 0 and tau_c > 0");
    if (cfg.field.variant == FieldVariant::thermal && !(cfg.integration.time_window > 0.0))
        bad("thermal field needs integration.time_window > 0");
    if (cfg.field.direction.norm() == 0.0) bad("field.direction must be nonzero");
    if (cfg.detector.energy_kev && !(*cfg.detector.energy_kev > 0.0))
        bad("detector.energy_kev must be > 0");
    for (const auto& p : cfg.detector.pixels) {
        if (p.direction.norm() == 0.0) bad("pixel directions must be nonzero");
        if (p.mu != 0 && p.mu != 1) bad("pixel mu must be 0 or 1");
        if (!(p.weight > 0.0)) bad("pixel weight must be > 0");
    }
    if (cfg.scan.enabled) {
        if (cfg.scan.slot < 1 || cfg.scan.slot > cfg.n) bad("scan.slot must be in 1..n");
        if (cfg.scan.directions.empty()) {
            if (cfg.scan.points < 1) bad("scan.points must be >= 1");
            if (cfg.scan.axis.norm() == 0.0) bad("scan.axis must be nonzero");
            const double c = std::abs(cfg.scan.axis.normalized().dot(cfg.field.direction.normalized()));
            if (c > 1e-9) bad("scan.axis must be perpendicular to field.direction");
        }
    }
    if (!(cfg.volume > 0.0)) bad("units.volume must be > 0");
    if (cfg.output.format != "csv" && cfg.output.format != "json")
        bad("output.format must be csv or json");
    try {
        cfg.matter.validate();
        cfg.cumulant.validate();
        cfg.integration.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        bad(e.what());
    }
}

SignalProblem build_problem(const RunConfig& cfg) {
    const double alpha = units::alpha;
    const FieldBlock& fb = cfg.field;
    const double e_pump = units::kev_to_hartree(fb.photon_energy_kev);
    const Mode pump = mode_from_direction(fb.direction, e_pump, fb.mu, Role::pump, alpha);
    const PulseEnvelope env(fb.tau0, fb.t_center, fb.r0);
    SignalProblem p{cfg.n,
                    FieldModel(fb.variant, fb.e0, pump, env, fb.xi_t, fb.tau_c),
                    cfg.matter,
                    cfg.cumulant,
                    {},
                    UnitsContext(alpha, cfg.volume)};

    const double e_det = cfg.detector.energy_kev ? units::kev_to_hartree(*cfg.detector.energy_kev) : e_pump;
    const double ks = e_det * alpha;
    auto pixel_set = [&](int slot, const std::optional<Vec3>& dir) {
        std::vector<DetectorPixel> px;
        for (int j = 0; j < cfg.n; ++j) {
            const PixelBlock& b = cfg.detector.pixels[j];
            const Vec3 d = (j == slot && dir) ? *dir : b.direction;
            px.emplace_back(j + 1, mode_from_direction(d, e_det, b.mu, Role::detector, alpha), b.weight);
        }
        DetectionConfig det(std::move(px), cfg.detector.equal_time, cfg.n_max);
        const Vec3 q = make_transfer(pump, det.pixels[slot].mode).q_tilde;
        return PatternPoint{q, std::move(det)};
    };

    const int slot = cfg.scan.slot - 1;
    if (!cfg.scan.enabled) {
        p.points.push_back(pixel_set(0, std::nullopt));
    } else if (!cfg.scan.directions.empty()) {
        for (const auto& d : cfg.scan.directions) p.points.push_back(pixel_set(slot, d));
    } else {
        const Vec3 kp = fb.direction.normalized();
        const Vec3 u = cfg.scan.axis.normalized();
        for (int i = 0; i < cfg.scan.points; ++i) {
            const double s = cfg.scan.points == 1
                                 ? cfg.scan.s_min
                                 : cfg.scan.s_min + (cfg.scan.s_max - cfg.scan.s_min) * i /
                                                        double(cfg.scan.points - 1);
            const double sphi = s / ks;
            if (std::abs(sphi) > 1.0)
                throw ConfigError("invalid config: scan transfer " + std::to_string(s) +
                                  " exceeds the scattered wavenumber");
            const double cphi = std::sqrt(1.0 - sphi * sphi);
            p.points.push_back(pixel_set(slot, Vec3(cphi * kp - sphi * u)));
        }
    }
    return p;
}

std::string dump_config(const RunConfig& cfg) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "schema_version" << YAML::Value << schema_version;
    e << YAML::Key << "n" << YAML::Value << cfg.n;
    e << YAML::Key << "n_max" << YAML::Value << cfg.n_max;
    e << YAML::Key << "tiers" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Tier t : cfg.tiers) e << to_string(t);
    e << YAML::EndSeq;

    const FieldBlock& f = cfg.field;
    e << YAML::Key << "field" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "variant" << YAML::Value << to_string(f.variant);
    e << YAML::Key << "e0" << YAML::Value << f.e0;
    e << YAML::Key << "photon_energy_kev" << YAML::Value << f.photon_energy_kev;
    e << YAML::Key << "direction" << YAML::Value;
    emit_vec(e, f.direction);
    e << YAML::Key << "mu" << YAML::Value << f.mu;
    e << YAML::Key << "tau0" << YAML::Value << f.tau0;
    e << YAML::Key << "t_center" << YAML::Value << f.t_center;
    e << YAML::Key << "r0" << YAML::Value;
    emit_vec(e, f.r0);
    e << YAML::Key << "xi_t" << YAML::Value << f.xi_t;
    e << YAML::Key << "tau_c" << YAML::Value << f.tau_c;
    e << YAML::EndMap;

    const MatterModel& m = cfg.matter;
    e << YAML::Key << "matter" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "variant" << YAML::Value << to_string(m.variant);
    e << YAML::Key << "centers" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : m.centers) {
        e << YAML::Flow << YAML::BeginSeq << c.position.x() << c.position.y() << c.position.z()
          << c.weight;
        if (m.variant == MatterVariant::gaussian_blobs) e << c.width;
        e << YAML::EndSeq;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "xi" << YAML::Value << m.xi;
    e << YAML::Key << "tau_coh" << YAML::Value << m.tau_coh;
    e << YAML::Key << "fluct_amplitude" << YAML::Value << m.fluct_amplitude;
    e << YAML::Key << "aux_scale" << YAML::Value << cfg.cumulant.aux_scale;
    e << YAML::Key << "cross_scale" << YAML::Value << cfg.cumulant.cross_scale;
    e << YAML::Key << "point_width" << YAML::Value << m.point_width;
    e << YAML::EndMap;

    e << YAML::Key << "detector" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "energy_kev" << YAML::Value
      << (cfg.detector.energy_kev ? *cfg.detector.energy_kev : f.photon_energy_kev);
    e << YAML::Key << "equal_time" << YAML::Value << cfg.detector.equal_time;
    e << YAML::Key << "pixels" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : cfg.detector.pixels) {
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "direction" << YAML::Value;
        emit_vec(e, p.direction);
        e << YAML::Key << "mu" << YAML::Value << p.mu << YAML::Key << "weight" << YAML::Value
          << p.weight << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;

    if (cfg.scan.enabled) {
        e << YAML::Key << "scan" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "slot" << YAML::Value << cfg.scan.slot;
        if (!cfg.scan.directions.empty()) {
            e << YAML::Key << "directions" << YAML::Value << YAML::BeginSeq;
            for (const auto& d : cfg.scan.directions) emit_vec(e, d);
            e << YAML::EndSeq;
        } else {
            e << YAML::Key << "axis" << YAML::Value;
            emit_vec(e, cfg.scan.axis);
            e << YAML::Key << "s_min" << YAML::Value << cfg.scan.s_min;
            e << YAML::Key << "s_max" << YAML::Value << cfg.scan.s_max;
            e << YAML::Key << "points" << YAML::Value << cfg.scan.points;
        }
        e << YAML::EndMap;
    }

    const IntegrationConfig& ic = cfg.integration;
    e << YAML::Key << "integration" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "method" << YAML::Value << to_string(ic.method);
    e << YAML::Key << "samples" << YAML::Value << ic.samples;
    e << YAML::Key << "seed" << YAML::Value << ic.rng_seed;
    e << YAML::Key << "batch_size" << YAML::Value << ic.batch_size;
    e << YAML::Key << "spatial_box" << YAML::Value;
    emit_vec(e, ic.spatial_box);
    e << YAML::Key << "time_window" << YAML::Value << ic.time_window;
    e << YAML::Key << "grid_nodes" << YAML::Value << ic.grid_nodes;
    e << YAML::Key << "threads" << YAML::Value << ic.threads;
    if (ic.target_rel_stderr)
        e << YAML::Key << "target_rel_stderr" << YAML::Value << *ic.target_rel_stderr;
    e << YAML::EndMap;

    e << YAML::Key << "units" << YAML::Value << YAML::BeginMap << YAML::Key << "volume"
      << YAML::Value << cfg.volume << YAML::EndMap;
    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "path" << YAML::Value << cfg.output.path;
    e << YAML::Key << "format" << YAML::Value << cfg.output.format;
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

}  // namespace mpxd
