// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file output.hpp
 * @brief Pattern, report and manifest serialization.
 *
 * Pattern files contain only deterministic quantities, so reruns with the same
 * configuration and seed are byte-identical. Wall-clock data lives in the
 * separate manifest.
 */

#pragma once

#include "mpxd/signal.hpp"

#include <string>
#include <vector>

namespace mpxd {

std::string sha256_hex(const std::string& bytes);

/// qx,qy,qz,value,stderr,tier with %.17g numbers, one row per point per tier.
std::string format_csv(const std::vector<SignalGrid>& grids);

/// Records plus metadata (photon order, prefactor, sample counts, raw values).
std::string format_json(const std::vector<SignalGrid>& grids, int n);

std::string format_hierarchy_json(const HierarchyReport& report, int n);

struct ManifestInfo {
    std::string command;
    std::string config_path;
    std::string config_sha256;
    std::string resolved_config;
    std::uint64_t seed = 0;
    long samples_per_point = 0;
    long strata = 0;
    std::size_t q_points = 0;
    std::vector<std::string> tiers;
    double wall_time_s = 0.0;
    int threads = 1;
    bool budget_exceeded = false;
    std::vector<std::string> outputs;
};

std::string format_manifest(const ManifestInfo& info);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mpxd
