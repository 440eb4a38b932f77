#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netmatch/common.hpp"

namespace netmatch {

// Undirected simple graph on dense vertices 0..n-1. Immutable once constructed;
// adjacency is kept both as sorted neighbor lists (for enumeration) and as a
// bit matrix (for O(1) edge tests).
class Graph {
public:
    Graph() = default;

    explicit Graph(int n, const std::vector<std::pair<int, int>>& edge_list = {}) {
        if (n < 0) throw InputError("graph: negative vertex count");
        n_ = n;
        row_words_ = static_cast<std::size_t>((n + 63) / 64);
        bits_.assign(static_cast<std::size_t>(n) * row_words_, 0);
        for (const auto& [u, v] : edge_list) {
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw InputError("graph: edge endpoint out of range: (" + std::to_string(u) +
                                 "," + std::to_string(v) + ")");
            if (u == v) throw InputError("graph: self-loop at vertex " + std::to_string(u));
            set_bit(u, v);
            set_bit(v, u);
        }
        rebuild_lists();
    }

    int vertex_count() const { return n_; }
    std::size_t edge_count() const { return edge_count_; }

    bool has_edge(int u, int v) const {
        return (bits_[static_cast<std::size_t>(u) * row_words_ + (static_cast<unsigned>(v) >> 6)] >>
                (static_cast<unsigned>(v) & 63)) &
               1u;
    }

    std::span<const int> neighbors(int v) const {
        return {adj_.data() + ptr_[v], adj_.data() + ptr_[v + 1]};
    }

    int degree(int v) const { return static_cast<int>(ptr_[v + 1] - ptr_[v]); }

    // Edges as sorted (u, v) pairs with u < v.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        out.reserve(edge_count_);
        for (int u = 0; u < n_; ++u)
            for (int v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.n_ == b.n_ && a.bits_ == b.bits_;
    }

private:
    void set_bit(int u, int v) {
        bits_[static_cast<std::size_t>(u) * row_words_ + (static_cast<unsigned>(v) >> 6)] |=
            std::uint64_t{1} << (static_cast<unsigned>(v) & 63);
    }

    void rebuild_lists() {
        ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
        adj_.clear();
        for (int u = 0; u < n_; ++u) {
            for (int v = 0; v < n_; ++v)
                if (has_edge(u, v)) adj_.push_back(v);
            ptr_[static_cast<std::size_t>(u) + 1] = adj_.size();
        }
        edge_count_ = adj_.size() / 2;
    }

    int n_ = 0;
    std::size_t row_words_ = 0;
    std::size_t edge_count_ = 0;
    std::vector<std::uint64_t> bits_;
    std::vector<int> adj_;
    std::vector<std::size_t> ptr_{0};
};

// Per-unit binary treatment indicators.
struct TreatmentVector {
    std::vector<std::uint8_t> t;

    TreatmentVector() = default;
    explicit TreatmentVector(std::vector<std::uint8_t> values) : t(std::move(values)) {
        for (auto v : t)
            if (v > 1) throw InputError("treatment vector: entries must be 0 or 1");
    }

    std::size_t size() const { return t.size(); }
    bool treated(int i) const { return t[static_cast<std::size_t>(i)] != 0; }
    std::uint8_t operator[](int i) const { return t[static_cast<std::size_t>(i)]; }

    int count_treated() const {
        int c = 0;
        for (auto v : t) c += v;
        return c;
    }
};

inline void require_compatible(const Graph& g, const TreatmentVector& t) {
    if (t.size() != static_cast<std::size_t>(g.vertex_count()))
        throw InputError("treatment vector length does not match graph vertex count");
}

inline void require_vertex(const Graph& g, int i) {
    if (i < 0 || i >= g.vertex_count())
        throw InputError("vertex id out of range: " + std::to_string(i));
}

// A graph together with per-vertex treatment labels and the original ids of
// its (relabeled) vertices.
struct LabeledGraph {
    Graph graph;
    std::vector<std::uint8_t> labels;
    std::vector<int> vertex_map;
};

// Subgraph induced by `vertices`, relabeled to 0..k-1 in ascending original
// order. The sorted original ids are returned through `vertex_map` if given.
inline Graph induced_subgraph(const Graph& g, std::span<const int> vertices,
                              std::vector<int>* vertex_map = nullptr) {
    std::vector<int> verts(vertices.begin(), vertices.end());
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    for (int v : verts) require_vertex(g, v);

    std::vector<std::pair<int, int>> edges;
    for (std::size_t a = 0; a < verts.size(); ++a)
        for (std::size_t b = a + 1; b < verts.size(); ++b)
            if (g.has_edge(verts[a], verts[b]))
                edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    if (vertex_map) *vertex_map = verts;
    return Graph(static_cast<int>(verts.size()), edges);
}

// Vertices within `hops` BFS steps of i, ego excluded unless requested.
inline std::vector<int> neighborhood_vertices(const Graph& g, int i, int hops,
                                              bool include_ego = false) {
    require_vertex(g, i);
    if (hops < 1) throw InputError("neighborhood_vertices: hops must be >= 1");

    std::vector<int> dist(static_cast<std::size_t>(g.vertex_count()), -1);
    std::vector<int> frontier{i};
    dist[static_cast<std::size_t>(i)] = 0;
    std::vector<int> out;
    for (int d = 1; d <= hops && !frontier.empty(); ++d) {
        std::vector<int> next;
        for (int u : frontier)
            for (int v : g.neighbors(u))
                if (dist[static_cast<std::size_t>(v)] < 0) {
                    dist[static_cast<std::size_t>(v)] = d;
                    next.push_back(v);
                    out.push_back(v);
                }
        frontier = std::move(next);
    }
    if (include_ego) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

struct NeighborhoodOptions {
    int hops = 1;
    bool include_ego = false;
};

// Labeled neighborhood graph of unit i: the subgraph induced by the vertices
// within `hops` of i, each labeled with its treatment indicator.
inline LabeledGraph labeled_neighborhood(const Graph& g, const TreatmentVector& t, int i,
                                         NeighborhoodOptions opts = {}) {
    require_compatible(g, t);
    std::vector<int> verts = neighborhood_vertices(g, i, opts.hops, opts.include_ego);
    LabeledGraph out;
    out.graph = induced_subgraph(g, verts, &out.vertex_map);
    out.labels.reserve(out.vertex_map.size());
    for (int v : out.vertex_map) out.labels.push_back(t[v]);
    return out;
}

// Number of treated neighbors of unit i.
inline int treated_degree(const Graph& g, const TreatmentVector& t, int i) {
    require_compatible(g, t);
    require_vertex(g, i);
    int c = 0;
    for (int v : g.neighbors(i)) c += t[v];
    return c;
}

}  // namespace netmatch
