// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/output.hpp"

#include <json.hpp>
#include <openssl/sha.h>

#include <cstdio>
#include <fstream>

namespace mpxd {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json records(const std::vector<SignalGrid>& grids) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& g : grids)
        for (std::size_t i = 0; i < g.values.size(); ++i)
            out.push_back({{"qx", g.q_points[i].x()},
                           {"qy", g.q_points[i].y()},
                           {"qz", g.q_points[i].z()},
                           {"value", g.values[i]},
                           {"stderr", g.mc_stderr[i]},
                           {"raw", g.raw_values[i]},
                           {"tier", to_string(g.tier)}});
    return out;
}

nlohmann::json tier_meta(const std::vector<SignalGrid>& grids) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& g : grids)
        out[to_string(g.tier)] = {{"samples_per_point", g.samples_per_point},
                                  {"strata", g.strata},
                                  {"budget_exceeded", g.budget_exceeded}};
    return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char c : digest) {
        out += hex[c >> 4];
        out += hex[c & 15];
    }
    return out;
}

std::string format_csv(const std::vector<SignalGrid>& grids) {
    std::string out = "qx,qy,qz,value,stderr,tier\n";
    for (const auto& g : grids)
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            const Vec3& q = g.q_points[i];
            out += num(q.x()) + "," + num(q.y()) + "," + num(q.z()) + "," + num(g.values[i]) + "," +
                   num(g.mc_stderr[i]) + "," + to_string(g.tier) + "\n";
        }
    return out;
}

std::string format_json(const std::vector<SignalGrid>& grids, int n) {
    nlohmann::json j;
    j["n"] = n;
    j["prefactor"] = grids.empty() ? 1.0 : grids.front().prefactor;
    j["prefactor_note"] = "raw = prefactor * value with prefactor (c_tilde^2 alpha^4)^n at the configured volume";
    j["tiers"] = tier_meta(grids);
    j["records"] = records(grids);
    return j.dump(2) + "\n";
}

std::string format_hierarchy_json(const HierarchyReport& report, int n) {
    nlohmann::json j;
    j["n"] = n;
    j["reference"] = to_string(report.reference);
    j["tiers"] = tier_meta(report.run.grids);
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& g : report.gaps)
        gaps.push_back({{"tier", to_string(g.tier)},
                        {"l2_gap", g.l2_gap},
                        {"l2_gap_stderr", g.l2_gap_stderr},
                        {"rel_dev", g.rel_dev}});
    j["gaps"] = gaps;
    j["records"] = records(report.run.grids);
    return j.dump(2) + "\n";
}

std::string format_manifest(const ManifestInfo& m) {
    nlohmann::json j;
    j["tool"] = "mpxd";
    j["version"] = MPXD_VERSION;
    j["command"] = m.command;
    j["config_path"] = m.config_path;
    j["config_sha256"] = m.config_sha256;
    j["resolved_config"] = m.resolved_config;
    j["seed"] = m.seed;
    j["samples_per_point"] = m.samples_per_point;
    j["strata"] = m.strata;
    j["q_points"] = m.q_points;
    j["tiers"] = m.tiers;
    j["wall_time_s"] = m.wall_time_s;
    j["threads"] = m.threads;
    j["budget_exceeded"] = m.budget_exceeded;
    j["outputs"] = m.outputs;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open output file '" + path + "'");
    out << content;
    if (!out) throw Error("failed writing output file '" + path + "'");
}

}  // namespace mpxd
