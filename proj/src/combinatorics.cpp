// Copyright 2026 The mpxd Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpxd/combinatorics.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace mpxd {

namespace {

int branch_rank(Branch b) {
    switch (b) {
        case Branch::detection: return 0;
        case Branch::primed: return 1;
        case Branch::doubleprimed: return 2;
    }
    return 3;
}

void check_order(int n, int n_max, const char* what) {
    if (n < 1) throw Error(std::string(what) + ": n must be >= 1");
    if (n > n_max) {
        std::ostringstream os;
        os << what << ": n = " << n << " exceeds n_max = " << n_max
           << " (factorial growth guard; raise n_max to override)";
        throw Error(os.str());
    }
}

IndexLabel primed(int slot) { return {slot, Branch::primed}; }
IndexLabel doubleprimed(int slot) { return {slot, Branch::doubleprimed}; }
IndexLabel detection(int slot) { return {slot, Branch::detection}; }

std::pair<IndexLabel, IndexLabel> oriented(IndexLabel a, IndexLabel b) {
    if (b < a) std::swap(a, b);
    return {a, b};
}

void canonicalize(Pairing& p) { std::sort(p.pairs.begin(), p.pairs.end()); }

bool pairing_less(const Pairing& a, const Pairing& b) {
    if (a.tag != b.tag) return static_cast<int>(a.tag) < static_cast<int>(b.tag);
    return a.pairs < b.pairs;
}

void match_recursive(std::vector<int>& free_vertices, std::vector<std::pair<int, int>>& current,
                     std::vector<std::vector<std::pair<int, int>>>& out) {
    if (free_vertices.empty()) {
        out.push_back(current);
        return;
    }
    const int first = free_vertices.front();
    for (std::size_t k = 1; k < free_vertices.size(); ++k) {
        const int partner = free_vertices[k];
        std::vector<int> rest;
        rest.reserve(free_vertices.size() - 2);
        for (std::size_t m = 1; m < free_vertices.size(); ++m)
            if (m != k) rest.push_back(free_vertices[m]);
        current.emplace_back(first, partner);
        match_recursive(rest, current, out);
        current.pop_back();
    }
}

IndexLabel label_of_vertex(int v, int n) {
    return v < n ? primed(v + 1) : doubleprimed(v - n + 1);
}

// -- exhaustive counters for the oracle -------------------------------------

bool is_bijection(const std::vector<int>& map, int n) {
    std::vector<bool> hit(n, false);
    for (int v : map) {
        if (hit[v]) return false;
        hit[v] = true;
    }
    return true;
}

/// Advances `map` as an n-digit base-n counter; false after the last value.
bool next_map(std::vector<int>& map, int n) {
    for (int& digit : map) {
        if (++digit < n) return true;
        digit = 0;
    }
    return false;
}

std::int64_t count_perfect_matchings(std::uint32_t mask) {
    if (mask == 0) return 1;
    int first = 0;
    while (!(mask & (1u << first))) ++first;
    const std::uint32_t rest = mask & ~(1u << first);
    std::int64_t total = 0;
    for (int j = 0; j < 32; ++j)
        if (rest & (1u << j)) total += count_perfect_matchings(rest & ~(1u << j));
    return total;
}

}  // namespace

std::strong_ordering IndexLabel::operator<=>(const IndexLabel& other) const {
    const int ra = branch_rank(branch), rb = branch_rank(other.branch);
    if (ra != rb) return ra <=> rb;
    return slot <=> other.slot;
}

std::string IndexLabel::str() const {
    std::string s = std::to_string(slot);
    if (branch == Branch::primed) s += "'";
    if (branch == Branch::doubleprimed) s += "''";
    return s;
}

const char* to_string(PairingClass cls) {
    switch (cls) {
        case PairingClass::M: return "M";
        case PairingClass::W: return "W";
        case PairingClass::G: return "G";
    }
    return "?";
}

const char* to_string(PairingTag tag) {
    switch (tag) {
        case PairingTag::none: return "none";
        case PairingTag::cross: return "cross";
        case PairingTag::aux: return "aux";
    }
    return "?";
}

PairingClass parse_pairing_class(const std::string& text) {
    if (text == "m" || text == "M") return PairingClass::M;
    if (text == "w" || text == "W") return PairingClass::W;
    if (text == "g" || text == "G") return PairingClass::G;
    throw Error("unknown pairing class '" + text + "' (expected m, w or g)");
}

void canonicalize(PairingSet& set) {
    for (auto& p : set.pairings) canonicalize(p);
    std::sort(set.pairings.begin(), set.pairings.end(), pairing_less);
}

PairingSet enumerate_detection_configs(int n, int n_max) {
    check_order(n, n_max, "enumerate_detection_configs");
    PairingSet set{n, PairingClass::M, {}};
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 1);
    do {
        std::vector<int> tau(n);
        std::iota(tau.begin(), tau.end(), 1);
        do {
            Pairing p;
            p.cls = PairingClass::M;
            for (int d = 0; d < n; ++d) {
                p.pairs.push_back(oriented(detection(d + 1), primed(sigma[d])));
                p.pairs.push_back(oriented(detection(d + 1), doubleprimed(tau[d])));
            }
            set.pairings.push_back(std::move(p));
        } while (std::next_permutation(tau.begin(), tau.end()));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    canonicalize(set);
    return set;
}

PairingSet enumerate_field_pairings(int n, int n_max) {
    check_order(n, n_max, "enumerate_field_pairings");
    PairingSet set{n, PairingClass::W, {}};
    std::vector<int> partner(n);
    std::iota(partner.begin(), partner.end(), 1);
    do {
        Pairing p;
        p.cls = PairingClass::W;
        for (int j = 0; j < n; ++j) p.pairs.push_back(oriented(primed(j + 1), doubleprimed(partner[j])));
        set.pairings.push_back(std::move(p));
    } while (std::next_permutation(partner.begin(), partner.end()));
    canonicalize(set);
    return set;
}

PairingSet enumerate_density_pairings(int n, int n_max) {
    check_order(n, n_max, "enumerate_density_pairings");
    std::vector<int> vertices(2 * n);
    std::iota(vertices.begin(), vertices.end(), 0);
    std::vector<std::pair<int, int>> current;
    std::vector<std::vector<std::pair<int, int>>> matchings;
    match_recursive(vertices, current, matchings);

    PairingSet set{n, PairingClass::G, {}};
    for (const auto& m : matchings) {
        Pairing p;
        p.cls = PairingClass::G;
        bool all_cross = true;
        for (auto [a, b] : m) {
            const IndexLabel la = label_of_vertex(a, n), lb = label_of_vertex(b, n);
            if (la.branch == lb.branch) all_cross = false;
            p.pairs.push_back(oriented(la, lb));
        }
        p.tag = all_cross ? PairingTag::cross : PairingTag::aux;
        set.pairings.push_back(std::move(p));
    }
    canonicalize(set);
    return set;
}

PairingSet enumerate(PairingClass cls, int n, int n_max) {
    switch (cls) {
        case PairingClass::M: return enumerate_detection_configs(n, n_max);
        case PairingClass::W: return enumerate_field_pairings(n, n_max);
        case PairingClass::G: return enumerate_density_pairings(n, n_max);
    }
    throw Error("enumerate: bad class");
}

std::int64_t matching_count_oracle(int n, PairingClass cls) {
    if (n < 1 || n > 5) throw Error("matching_count_oracle: n must be in 1..5");
    switch (cls) {
        case PairingClass::G: return count_perfect_matchings((1u << (2 * n)) - 1u);
        case PairingClass::W: {
            std::int64_t count = 0;
            std::vector<int> map(n, 0);
            do {
                if (is_bijection(map, n)) ++count;
            } while (next_map(map, n));
            return count;
        }
        case PairingClass::M: {
            // Pairs (primed map, double-primed map) from detection slots, both bijective.
            std::vector<std::vector<int>> maps;
            std::vector<int> map(n, 0);
            do {
                maps.push_back(map);
            } while (next_map(map, n));
            std::int64_t count = 0;
            for (const auto& a : maps) {
                if (!is_bijection(a, n)) continue;
                for (const auto& b : maps)
                    if (is_bijection(b, n)) ++count;
            }
            return count;
        }
    }
    throw Error("matching_count_oracle: bad class");
}

int vertex_index(const IndexLabel& label, int n) {
    switch (label.branch) {
        case Branch::primed: return label.slot - 1;
        case Branch::doubleprimed: return n + label.slot - 1;
        case Branch::detection: break;
    }
    throw Error("vertex_index: detection labels are not scattering vertices");
}

DetectionMap detection_map(const Pairing& p, int n) {
    if (p.cls != PairingClass::M) throw Error("detection_map: pairing is not class M");
    DetectionMap map{std::vector<int>(n, -1), std::vector<int>(n, -1)};
    for (const auto& [a, b] : p.pairs) {
        if (a.branch != Branch::detection) throw Error("detection_map: malformed M pairing");
        const int d = a.slot - 1;
        if (b.branch == Branch::primed) map.sigma[d] = b.slot - 1;
        if (b.branch == Branch::doubleprimed) map.tau[d] = b.slot - 1;
    }
    return map;
}

std::vector<int> field_partner(const Pairing& p, int n) {
    std::vector<int> partner(n, -1);
    for (const auto& [a, b] : p.pairs) {
        if (a.branch != Branch::primed || b.branch != Branch::doubleprimed)
            throw Error("field_partner: pairing contains a same-branch pair");
        partner[a.slot - 1] = b.slot - 1;
    }
    return partner;
}

std::vector<std::pair<int, int>> vertex_pairs(const Pairing& p, int n) {
    std::vector<std::pair<int, int>> out;
    out.reserve(p.pairs.size());
    for (const auto& [a, b] : p.pairs) out.emplace_back(vertex_index(a, n), vertex_index(b, n));
    return out;
}

std::string term_string(const Pairing& p, int /*n*/) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [a, b] : p.pairs) {
        if (!first) os << ' ';
        first = false;
        switch (p.cls) {
            case PairingClass::M:
                os << (b.branch == Branch::primed ? "D(" : "D*(") << a.str() << ';' << b.str() << ')';
                break;
            case PairingClass::W: os << "Dp(" << a.str() << ';' << b.str() << ')'; break;
            case PairingClass::G: os << "K(" << a.str() << ';' << b.str() << ')'; break;
        }
    }
    return os.str();
}

std::string serialize_text(const PairingSet& set) {
    std::ostringstream os;
    for (const auto& p : set.pairings) {
        if (set.cls == PairingClass::G) os << (p.tag == PairingTag::cross ? "cross " : "aux   ");
        os << term_string(p, set.order_n) << '\n';
    }
    return os.str();
}

std::string serialize_json(const PairingSet& set) {
    nlohmann::json j;
    j["class"] = to_string(set.cls);
    j["order_n"] = set.order_n;
    j["count"] = set.pairings.size();
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : set.pairings) {
        nlohmann::json e;
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& [a, b] : p.pairs) pairs.push_back({a.str(), b.str()});
        e["pairs"] = pairs;
        e["term"] = term_string(p, set.order_n);
        if (set.cls == PairingClass::G) e["tag"] = to_string(p.tag);
        list.push_back(e);
    }
    j["pairings"] = list;
    return j.dump(2);
}

}  // namespace mpxd
