// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file combinatorics.hpp
 * @brief Pairing families behind the factorized detection, field and density sums.
 *
 * Three classes of index matchings appear in an n-photon signal:
 *
 *  - M: detection configurations. Every detection slot d is paired with one
 *    primed and one double-primed scattering index, i.e. a pair of bijections
 *    (σ, τ). Count (n!)².
 *  - W: cross-branch field pairings, bijections primed → double-primed. Count n!.
 *  - G: every perfect matching of the 2n scattering indices. Count (2n−1)!!.
 *    A G-matching is tagged `cross` when all of its pairs join opposite
 *    branches (these are exactly the W matchings) and `aux` otherwise.
 *
 * Labels are ordered detection < primed < double-primed, slot-major within a
 * branch. Each pair is stored (lower, higher) and pairs within a pairing are
 * sorted, so a pairing's pair list is its canonical form. Pairing sets are
 * sorted lexicographically on that form, with cross G-matchings ahead of aux.
 */

#pragma once

#include "mpxd/core.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mpxd {

enum class PairingClass { M, W, G };
enum class PairingTag { none, cross, aux };

const char* to_string(PairingClass cls);
const char* to_string(PairingTag tag);
PairingClass parse_pairing_class(const std::string& text);

inline constexpr int default_n_max = 4;

struct IndexLabel {
    int slot = 1;  // 1..n
    Branch branch = Branch::primed;

    std::strong_ordering operator<=>(const IndexLabel& other) const;
    bool operator==(const IndexLabel& other) const = default;

    /// 1', 2'' or plain 1 for detection slots.
    std::string str() const;
};

struct Pairing {
    std::vector<std::pair<IndexLabel, IndexLabel>> pairs;
    PairingClass cls = PairingClass::G;
    PairingTag tag = PairingTag::none;

    bool operator==(const Pairing& other) const = default;
};

struct PairingSet {
    int order_n = 0;
    PairingClass cls = PairingClass::G;
    std::vector<Pairing> pairings;

    std::size_t size() const { return pairings.size(); }
};

PairingSet enumerate_detection_configs(int n, int n_max = default_n_max);
PairingSet enumerate_field_pairings(int n, int n_max = default_n_max);
PairingSet enumerate_density_pairings(int n, int n_max = default_n_max);
PairingSet enumerate(PairingClass cls, int n, int n_max = default_n_max);

/// Count by exhaustive search (no closed forms). Valid for 1 ≤ n ≤ 5.
std::int64_t matching_count_oracle(int n, PairingClass cls);

/// Sorts pairs inside every pairing and the pairings themselves.
void canonicalize(PairingSet& set);

// --- compact views used by the evaluators ---------------------------------

/// Vertex index: primed slot j → j−1, double-primed slot j → n+j−1.
int vertex_index(const IndexLabel& label, int n);

/// For an M pairing: sigma[d] / tau[d] are the 0-based primed / double-primed
/// slots contracted with detection slot d.
struct DetectionMap {
    std::vector<int> sigma;
    std::vector<int> tau;
};
DetectionMap detection_map(const Pairing& p, int n);

/// For a W pairing: partner[j] is the 0-based double-primed slot paired with primed j.
std::vector<int> field_partner(const Pairing& p, int n);

/// For a G (or W) pairing: the n pairs as vertex indices.
std::vector<std::pair<int, int>> vertex_pairs(const Pairing& p, int n);

// --- serialization ---------------------------------------------------------

/// One-line term in bracket notation, e.g.
///   M: "D(1;1') D*(1;1'') D(2;2') D*(2;2'')"
///   W: "Dp(1';1'') Dp(2';2'')"
///   G: "K(1';2') K(1'';2'')"
std::string term_string(const Pairing& p, int n);

/// Canonical multi-line text: one term per line, G lines prefixed by the tag.
std::string serialize_text(const PairingSet& set);

/// Canonical JSON dump (deterministic key order).
std::string serialize_json(const PairingSet& set);

}  // namespace mpxd
