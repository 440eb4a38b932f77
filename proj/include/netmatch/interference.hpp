#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "netmatch/graph.hpp"
#include "netmatch/parallel.hpp"

namespace netmatch {

namespace detail {

// BFS distances and shortest-path counts from a source.
inline void bfs_paths(const Graph& g, int src, std::vector<int>& dist, std::vector<double>& sigma) {
    const std::size_t n = static_cast<std::size_t>(g.vertex_count());
    dist.assign(n, -1);
    sigma.assign(n, 0.0);
    dist[static_cast<std::size_t>(src)] = 0;
    sigma[static_cast<std::size_t>(src)] = 1.0;
    std::vector<int> frontier{src};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int u : frontier)
            for (int v : g.neighbors(u)) {
                auto vi = static_cast<std::size_t>(v);
                if (dist[vi] < 0) {
                    dist[vi] = dist[static_cast<std::size_t>(u)] + 1;
                    next.push_back(v);
                }
                if (dist[vi] == dist[static_cast<std::size_t>(u)] + 1)
                    sigma[vi] += sigma[static_cast<std::size_t>(u)];
            }
        frontier = std::move(next);
    }
}

inline int binomial_int(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return static_cast<int>(r);
}

// Ego-included labeled neighborhood graph, shared by the treated-motif counts.
inline LabeledGraph ego_graph(const Graph& g, const TreatmentVector& t, int i, int hops = 1) {
    return labeled_neighborhood(g, t, i, {hops, true});
}

inline int triangles_with_treated(const LabeledGraph& h) {
    const Graph& g = h.graph;
    int count = 0;
    for (int a = 0; a < g.vertex_count(); ++a)
        for (int b : g.neighbors(a)) {
            if (b <= a) continue;
            for (int c : g.neighbors(b)) {
                if (c <= b || !g.has_edge(a, c)) continue;
                if (h.labels[static_cast<std::size_t>(a)] || h.labels[static_cast<std::size_t>(b)] ||
                    h.labels[static_cast<std::size_t>(c)])
                    ++count;
            }
        }
    return count;
}

inline int kstars_with_treated(const LabeledGraph& h, int k) {
    const Graph& g = h.graph;
    int count = 0;
    for (int center = 0; center < g.vertex_count(); ++center) {
        const int d = g.degree(center);
        if (d < k) continue;
        int total = binomial_int(d, k);
        int untreated = 0;
        if (!h.labels[static_cast<std::size_t>(center)]) {
            int u = 0;
            for (int v : g.neighbors(center))
                if (!h.labels[static_cast<std::size_t>(v)]) ++u;
            untreated = binomial_int(u, k);
        }
        count += total - untreated;
    }
    return count;
}

inline int dagger_in(const LabeledGraph& h, int k) {
    const Graph& g = h.graph;
    int count = 0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.degree(v) < k) continue;
        for (int u : g.neighbors(v))
            if (h.labels[static_cast<std::size_t>(u)]) {
                ++count;
                break;
            }
    }
    return count;
}

}  // namespace detail

// Triangles in the ego-included neighborhood graph of i containing at least
// one treated vertex.
inline int treated_triangles(const Graph& g, const TreatmentVector& t, int i) {
    return detail::triangles_with_treated(detail::ego_graph(g, t, i));
}

// k-stars (a center plus k of its neighbors; leaf-leaf edges unconstrained) in
// the ego-included neighborhood graph of i with at least one treated member.
inline int treated_kstars(const Graph& g, const TreatmentVector& t, int i, int k) {
    if (k < 2) throw InputError("treated_kstars: k must be >= 2");
    return detail::kstars_with_treated(detail::ego_graph(g, t, i), k);
}

// Vertices of the ego-included neighborhood graph with degree >= k (within
// that graph) and at least one treated neighbor (within that graph).
inline int dagger(const Graph& g, const TreatmentVector& t, int i, int k) {
    if (k < 1) throw InputError("dagger: k must be >= 1");
    return detail::dagger_in(detail::ego_graph(g, t, i), k);
}

// Normalized vertex betweenness: sum over unordered pairs {j,k} (both != i) of
// sigma_jk(i)/sigma_jk, scaled by 2/((n-1)(n-2)). Zero when n < 3; unreachable
// pairs contribute nothing.
inline double betweenness(const Graph& g, int i) {
    require_vertex(g, i);
    const int n = g.vertex_count();
    if (n < 3) return 0.0;

    std::vector<std::vector<int>> dist(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> sigma(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) detail::bfs_paths(g, s, dist[static_cast<std::size_t>(s)], sigma[static_cast<std::size_t>(s)]);

    double raw = 0.0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int k = j + 1; k < n; ++k) {
            if (k == i) continue;
            const auto& dj = dist[static_cast<std::size_t>(j)];
            if (dj[static_cast<std::size_t>(k)] < 0) continue;  // disconnected pair
            if (dj[static_cast<std::size_t>(i)] < 0) continue;
            const auto& di = dist[static_cast<std::size_t>(i)];
            if (dj[static_cast<std::size_t>(i)] + di[static_cast<std::size_t>(k)] !=
                dj[static_cast<std::size_t>(k)])
                continue;
            const double through =
                sigma[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] *
                sigma[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            raw += through / sigma[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        }
    }
    return raw * 2.0 / (static_cast<double>(n) * n - 3.0 * n + 2.0);
}

// Normalized closeness centrality. In disconnected graphs the sum is
// restricted to i's component and scaled by (component size - 1); an isolated
// vertex gets 0.
inline double closeness(const Graph& g, int i) {
    require_vertex(g, i);
    std::vector<int> dist;
    std::vector<double> sigma;
    detail::bfs_paths(g, i, dist, sigma);
    long long total = 0;
    int reached = 0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (v == i || dist[static_cast<std::size_t>(v)] < 0) continue;
        total += dist[static_cast<std::size_t>(v)];
        ++reached;
    }
    if (reached == 0) return 0.0;
    return static_cast<double>(reached) / static_cast<double>(total);
}

struct ComponentOptions {
    std::vector<int> star_ks{2, 4};
    int dagger_k = 3;
    int hops = 1;
    // Table-style components live on the ego-included neighborhood graph by
    // default; centralities can instead be computed on the whole graph.
    bool whole_graph_centralities = false;
};

struct ComponentMatrix {
    std::size_t n_units = 0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // column-major, names order

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t k = 0; k < names.size(); ++k)
            if (names[k] == name) return columns[k];
        throw InputError("component matrix: unknown column " + name);
    }
};

// The interference components: treated degree, treated triangles, treated
// k-stars, dagger counts, betweenness, closeness.
inline ComponentMatrix interference_components(const Graph& g, const TreatmentVector& t,
                                               const ComponentOptions& opts = {}) {
    require_compatible(g, t);
    ComponentMatrix m;
    m.n_units = static_cast<std::size_t>(g.vertex_count());
    m.names.push_back("treated_degree");
    m.names.push_back("treated_triangles");
    for (int k : opts.star_ks) m.names.push_back("treated_" + std::to_string(k) + "star");
    m.names.push_back("dagger" + std::to_string(opts.dagger_k));
    m.names.push_back("betweenness");
    m.names.push_back("closeness");
    m.columns.assign(m.names.size(), std::vector<double>(m.n_units, 0.0));

    parallel_for(m.n_units, [&](std::size_t ui) {
        const int i = static_cast<int>(ui);
        LabeledGraph ego = detail::ego_graph(g, t, i, opts.hops);
        int local_i = 0;
        for (std::size_t v = 0; v < ego.vertex_map.size(); ++v)
            if (ego.vertex_map[v] == i) local_i = static_cast<int>(v);

        std::size_t col = 0;
        m.columns[col++][ui] = treated_degree(g, t, i);
        m.columns[col++][ui] = detail::triangles_with_treated(ego);
        for (int k : opts.star_ks) m.columns[col++][ui] = detail::kstars_with_treated(ego, k);
        m.columns[col++][ui] = detail::dagger_in(ego, opts.dagger_k);
        if (opts.whole_graph_centralities) {
            m.columns[col++][ui] = betweenness(g, i);
            m.columns[col++][ui] = closeness(g, i);
        } else {
            m.columns[col++][ui] = betweenness(ego.graph, local_i);
            m.columns[col++][ui] = closeness(ego.graph, local_i);
        }
    });
    return m;
}

// Column z-scores with the sample (n-1) standard deviation; constant columns
// map to zeros.
inline std::vector<double> zscore_column(const std::vector<double>& x) {
    if (x.size() < 2) throw InputError("zscore: need at least 2 units");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    std::vector<double> out(x.size(), 0.0);
    if (sd > 0.0)
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
    return out;
}

inline ComponentMatrix zscore_normalize(const ComponentMatrix& m) {
    ComponentMatrix out = m;
    for (auto& col : out.columns) col = zscore_column(col);
    return out;
}

}  // namespace netmatch
