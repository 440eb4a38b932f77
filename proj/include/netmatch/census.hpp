#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "netmatch/graph.hpp"
#include "netmatch/parallel.hpp"

namespace netmatch {

inline constexpr int kMaxCodeVertices = 8;  // packed representation limit
inline constexpr int kDefaultMotifSize = 5;

// Isomorphism-invariant key for a small labeled graph. `bits` packs the
// lexicographically minimal (adjacency bits, label bits) pair over all vertex
// permutations: adjacency bits run over pairs (0,1),(0,2),...,(s-2,s-1) from
// the most significant position, followed by the s label bits. Two labeled
// graphs get equal codes exactly when some vertex bijection preserves both
// adjacency and labels.
struct CanonicalCode {
    std::uint8_t size = 0;
    std::uint64_t bits = 0;

    friend bool operator==(const CanonicalCode&, const CanonicalCode&) = default;
    friend auto operator<=>(const CanonicalCode&, const CanonicalCode&) = default;

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        if (bits == 0) return "0";
        std::string s;
        for (std::uint64_t v = bits; v != 0; v >>= 4) s.insert(s.begin(), digits[v & 0xF]);
        return s;
    }

    std::string column_name() const {
        return "s" + std::to_string(static_cast<int>(size)) + "_x" + hex();
    }
};

namespace detail {

// Minimal packed (adjacency, labels) value over all permutations of a graph
// given as per-vertex adjacency masks. Exhaustive: s <= 8 keeps this exact.
inline std::uint64_t canonical_bits(int s, const std::array<std::uint8_t, 8>& adj,
                                    const std::array<std::uint8_t, 8>& labels) {
    std::array<int, 8> perm{};
    for (int i = 0; i < s; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::uint64_t best = ~std::uint64_t{0};
    do {
        std::uint64_t cand = 0;
        for (int p = 0; p < s; ++p)
            for (int q = p + 1; q < s; ++q)
                cand = (cand << 1) |
                       ((adj[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])] >>
                         perm[static_cast<std::size_t>(q)]) &
                        1u);
        for (int p = 0; p < s; ++p)
            cand = (cand << 1) | labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])];
        best = std::min(best, cand);
    } while (std::next_permutation(perm.begin(), perm.begin() + s));
    return best;
}

inline std::uint64_t raw_bits(int s, const std::array<std::uint8_t, 8>& adj,
                              const std::array<std::uint8_t, 8>& labels) {
    std::uint64_t out = 0;
    for (int p = 0; p < s; ++p)
        for (int q = p + 1; q < s; ++q)
            out = (out << 1) | ((adj[static_cast<std::size_t>(p)] >> q) & 1u);
    for (int p = 0; p < s; ++p) out = (out << 1) | labels[static_cast<std::size_t>(p)];
    return out;
}

}  // namespace detail

// Canonical code of a labeled graph with at most `max_size` vertices.
inline CanonicalCode canonical_code(const LabeledGraph& h, int max_size = kDefaultMotifSize) {
    const int s = h.graph.vertex_count();
    if (s > max_size || s > kMaxCodeVertices)
        throw SizeError("canonical_code: graph has " + std::to_string(s) +
                        " vertices, cap is " + std::to_string(std::min(max_size, kMaxCodeVertices)));
    std::array<std::uint8_t, 8> adj{};
    std::array<std::uint8_t, 8> labels{};
    for (int u = 0; u < s; ++u) {
        labels[static_cast<std::size_t>(u)] = h.labels[static_cast<std::size_t>(u)] ? 1 : 0;
        for (int v : h.graph.neighbors(u))
            adj[static_cast<std::size_t>(u)] |= static_cast<std::uint8_t>(1u << v);
    }
    return {static_cast<std::uint8_t>(s), detail::canonical_bits(s, adj, labels)};
}

// Counts of connected induced labeled subgraphs, keyed by canonical code.
using CensusVector = std::map<CanonicalCode, std::int64_t>;

// ESU-style enumeration: every connected induced vertex subset with
// 1..max_size vertices is visited exactly once and its canonical code counted.
inline CensusVector enumerate_connected_subgraphs(const LabeledGraph& h, int max_size) {
    if (max_size < 1) throw InputError("enumerate_connected_subgraphs: max_size must be >= 1");
    max_size = std::min(max_size, kMaxCodeVertices);
    const Graph& g = h.graph;
    const int n = g.vertex_count();

    CensusVector out;
    std::unordered_map<std::uint64_t, std::uint64_t> memo;  // raw pattern -> canonical bits

    std::vector<int> sub;
    sub.reserve(static_cast<std::size_t>(max_size));

    auto record = [&](const std::vector<int>& members) {
        const int s = static_cast<int>(members.size());
        std::array<int, 8> sorted{};
        for (int a = 0; a < s; ++a) sorted[static_cast<std::size_t>(a)] = members[static_cast<std::size_t>(a)];
        std::sort(sorted.begin(), sorted.begin() + s);

        std::array<std::uint8_t, 8> adj{};
        std::array<std::uint8_t, 8> labels{};
        for (int a = 0; a < s; ++a) {
            labels[static_cast<std::size_t>(a)] =
                h.labels[static_cast<std::size_t>(sorted[static_cast<std::size_t>(a)])] ? 1 : 0;
            for (int b = a + 1; b < s; ++b)
                if (g.has_edge(sorted[static_cast<std::size_t>(a)], sorted[static_cast<std::size_t>(b)])) {
                    adj[static_cast<std::size_t>(a)] |= static_cast<std::uint8_t>(1u << b);
                    adj[static_cast<std::size_t>(b)] |= static_cast<std::uint8_t>(1u << a);
                }
        }
        const std::uint64_t raw = (static_cast<std::uint64_t>(s) << 40) | detail::raw_bits(s, adj, labels);
        auto it = memo.find(raw);
        std::uint64_t canon;
        if (it != memo.end()) {
            canon = it->second;
        } else {
            canon = detail::canonical_bits(s, adj, labels);
            memo.emplace(raw, canon);
        }
        ++out[CanonicalCode{static_cast<std::uint8_t>(s), canon}];
    };

    // ExtendSubgraph(sub, ext, root): each recursion node is one connected subset.
    auto extend = [&](auto&& self, std::vector<int>& ext, int root) -> void {
        while (!ext.empty()) {
            int w = ext.back();
            ext.pop_back();
            sub.push_back(w);
            record(sub);
            if (static_cast<int>(sub.size()) < max_size) {
                std::vector<int> next_ext = ext;
                for (int u : g.neighbors(w)) {
                    if (u <= root) continue;
                    bool fresh = true;
                    for (int m : sub)
                        if (m == u || (m != w && g.has_edge(m, u))) {
                            fresh = false;
                            break;
                        }
                    if (fresh)
                        for (int e : ext)
                            if (e == u) {
                                fresh = false;
                                break;
                            }
                    if (fresh) next_ext.push_back(u);
                }
                self(self, next_ext, root);
            }
            sub.pop_back();
        }
    };

    for (int v = 0; v < n; ++v) {
        sub.assign(1, v);
        record(sub);
        if (max_size > 1) {
            std::vector<int> ext;
            for (int u : g.neighbors(v))
                if (u > v) ext.push_back(u);
            extend(extend, ext, v);
        }
    }
    return out;
}

struct CensusOptions {
    int hops = 1;
    bool include_ego = false;
    int max_size = kDefaultMotifSize;
};

struct CensusResult {
    std::vector<CensusVector> per_unit;
    std::vector<CanonicalCode> universe;  // sorted by (size, bits)
};

// Census of every unit's labeled neighborhood graph plus the shared code
// universe that defines the matching columns.
inline CensusResult census_all_units(const Graph& g, const TreatmentVector& t,
                                     const CensusOptions& opts = {}) {
    require_compatible(g, t);
    CensusResult result;
    result.per_unit.resize(static_cast<std::size_t>(g.vertex_count()));
    parallel_for(static_cast<std::size_t>(g.vertex_count()), [&](std::size_t i) {
        LabeledGraph nb = labeled_neighborhood(g, t, static_cast<int>(i),
                                               {opts.hops, opts.include_ego});
        result.per_unit[i] = enumerate_connected_subgraphs(nb, opts.max_size);
    });
    std::set<CanonicalCode> universe;
    for (const auto& cv : result.per_unit)
        for (const auto& [code, count] : cv) universe.insert(code);
    result.universe.assign(universe.begin(), universe.end());
    return result;
}

// Dense units x universe count matrix with explicit zeros.
inline std::vector<std::vector<std::int64_t>> to_count_matrix(const CensusResult& census) {
    std::vector<std::vector<std::int64_t>> m(census.per_unit.size(),
                                             std::vector<std::int64_t>(census.universe.size(), 0));
    for (std::size_t i = 0; i < census.per_unit.size(); ++i)
        for (std::size_t k = 0; k < census.universe.size(); ++k) {
            auto it = census.per_unit[i].find(census.universe[k]);
            if (it != census.per_unit[i].end()) m[i][k] = it->second;
        }
    return m;
}

enum class ColumnKind { Subgraph, Covariate };

struct FeatureColumn {
    std::string name;
    ColumnKind kind = ColumnKind::Subgraph;
    std::vector<std::int64_t> values;
};

// Units x discrete matching covariates. Subgraph columns come first, in
// universe order; covariate columns follow in input order.
struct FeatureTable {
    std::size_t n_units = 0;
    std::vector<FeatureColumn> columns;

    const FeatureColumn* find(const std::string& name) const {
        for (const auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }
};

struct BinarizeOptions {
    int bins = 0;  // 0 = exact counts as categories; >= 2 = quantile bins
};

// Discretize census counts into matching categories. Exact mode keeps the raw
// count as the category; quantile mode assigns empirical-quantile bin indices
// with ties going to the lower bin.
inline FeatureTable binarize(const CensusResult& census, const BinarizeOptions& opts = {},
                             const std::vector<FeatureColumn>& covariates = {},
                             std::vector<std::string>* warnings = nullptr) {
    if (opts.bins != 0 && opts.bins < 2)
        throw InputError("binarize: quantile scheme needs bins >= 2");
    FeatureTable table;
    table.n_units = census.per_unit.size();
    const auto counts = to_count_matrix(census);

    for (std::size_t k = 0; k < census.universe.size(); ++k) {
        FeatureColumn col;
        col.name = census.universe[k].column_name();
        col.kind = ColumnKind::Subgraph;
        col.values.resize(table.n_units);
        if (opts.bins == 0) {
            for (std::size_t i = 0; i < table.n_units; ++i) col.values[i] = counts[i][k];
        } else {
            std::vector<std::int64_t> sorted(table.n_units);
            for (std::size_t i = 0; i < table.n_units; ++i) sorted[i] = counts[i][k];
            std::sort(sorted.begin(), sorted.end());
            const std::size_t n = sorted.size();
            std::vector<std::int64_t> breaks;
            for (int j = 1; j < opts.bins; ++j) {
                std::size_t idx = (n * static_cast<std::size_t>(j) + static_cast<std::size_t>(opts.bins) - 1) /
                                      static_cast<std::size_t>(opts.bins);
                breaks.push_back(sorted[std::min(n - 1, idx == 0 ? 0 : idx - 1)]);
            }
            if (sorted.front() == sorted.back() && warnings)
                warnings->push_back("binarize: column " + col.name +
                                    " is constant; quantile scheme yields a single bin");
            for (std::size_t i = 0; i < table.n_units; ++i) {
                std::int64_t b = 0;
                for (std::int64_t br : breaks)
                    if (br < counts[i][k]) ++b;
                col.values[i] = b;
            }
        }
        table.columns.push_back(std::move(col));
    }

    for (const auto& cov : covariates) {
        if (cov.values.size() != table.n_units)
            throw InputError("binarize: covariate column " + cov.name + " has wrong length");
        FeatureColumn col = cov;
        col.kind = ColumnKind::Covariate;
        table.columns.push_back(std::move(col));
    }
    return table;
}

}  // namespace netmatch
