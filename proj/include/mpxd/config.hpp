// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file config.hpp
 * @brief Run-configuration schema, parsing and validation.
 *
 * Run files are YAML mappings with a `schema_version` key. Keys carrying units
 * say so in their name (`photon_energy_kev`, `tau0_fs`); everything else is in
 * atomic units. Parsing fills every default, and `resolved` echoes the complete
 * configuration for the run manifest.
 */

#pragma once

#include "mpxd/signal.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mpxd {

inline constexpr int schema_version = 1;

/// Configuration problem: malformed file, unknown key or violated constraint.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct FieldBlock {
    FieldVariant variant = FieldVariant::coherent;
    double e0 = 1.0;
    double photon_energy_kev = 12.4;
    Vec3 direction = Vec3::UnitZ();
    int mu = 1;
    double tau0 = units::fs_to_au(1.0);  // a.u.
    double t_center = 0.0;
    Vec3 r0 = Vec3::Zero();
    double xi_t = 10.0;
    double tau_c = 100.0;
};

struct PixelBlock {
    Vec3 direction = Vec3::UnitZ();
    int mu = 1;
    double weight = 1.0;
};

struct DetectorBlock {
    std::optional<double> energy_kev;  // defaults to the pump energy (elastic)
    bool equal_time = true;
    std::vector<PixelBlock> pixels;
};

struct ScanBlock {
    bool enabled = false;
    int slot = 1;
    Vec3 axis = Vec3::UnitX();
    double s_min = 0.0, s_max = 0.0;
    int points = 1;
    std::vector<Vec3> directions;  // explicit alternative to the axis scan
};

struct OutputBlock {
    std::string path;
    std::string format = "csv";
};

struct RunConfig {
    int n = 1;
    int n_max = default_n_max;
    std::vector<Tier> tiers{Tier::both_fact};
    FieldBlock field;
    MatterModel matter;
    CumulantSpec cumulant;
    DetectorBlock detector;
    ScanBlock scan;
    IntegrationConfig integration;
    double volume = 1.0;
    OutputBlock output;

    /// Canonical YAML dump with all defaults filled.
    std::string resolved;
    /// Raw file bytes (hashed into the manifest).
    std::string source;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
RunConfig parse_config(const std::string& path);

/// Cross-field checks; throws ConfigError naming the offending constraint.
void validate_config(const RunConfig& cfg);

/// Modes, pixels and q-grid for the configured experiment.
SignalProblem build_problem(const RunConfig& cfg);

/// Emits the resolved configuration (used for `resolved` and `mpxd validate`).
std::string dump_config(const RunConfig& cfg);

/// Closest candidate by edit distance (empty when none is reasonably close).
std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates);

}  // namespace mpxd
