#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "netmatch/interference.hpp"

using namespace netmatch;

namespace {

Graph k3() { return Graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
Graph k4() { return Graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}); }
Graph star(int leaves) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
    return Graph(leaves + 1, edges);
}

Graph random_graph(int n, double p, std::mt19937_64& rng) {
    std::vector<std::pair<int, int>> edges;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (unif(rng) < p) edges.emplace_back(i, j);
    return Graph(n, edges);
}

// Floyd-Warshall distances, independent of the BFS used by the implementation.
std::vector<std::vector<double>> fw_distances(const Graph& g) {
    const int n = g.vertex_count();
    const double inf = 1e18;
    std::vector<std::vector<double>> d(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), inf));
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
    for (const auto& [u, v] : g.edges()) {
        d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
        d[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    std::min(d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                             d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                                 d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
    return d;
}

// All simple paths from a to b by DFS; returns (shortest length, #shortest,
// #shortest through `via`).
void path_census(const Graph& g, int a, int b, int via, int& best, long long& count,
                 long long& through) {
    const int n = g.vertex_count();
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::vector<int> path{a};
    used[static_cast<std::size_t>(a)] = 1;
    best = 1 << 20;
    count = through = 0;
    auto dfs = [&](auto&& self, int u) -> void {
        if (u == b) {
            const int len = static_cast<int>(path.size()) - 1;
            if (len < best) {
                best = len;
                count = 0;
                through = 0;
            }
            if (len == best) {
                ++count;
                for (int w : path)
                    if (w == via) ++through;
            }
            return;
        }
        if (static_cast<int>(path.size()) - 1 >= best) return;  // prune longer paths
        for (int v : g.neighbors(u)) {
            if (used[static_cast<std::size_t>(v)]) continue;
            used[static_cast<std::size_t>(v)] = 1;
            path.push_back(v);
            self(self, v);
            path.pop_back();
            used[static_cast<std::size_t>(v)] = 0;
        }
    };
    dfs(dfs, a);
}

double betweenness_oracle(const Graph& g, int i) {
    const int n = g.vertex_count();
    if (n < 3) return 0.0;
    double raw = 0.0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int k = j + 1; k < n; ++k) {
            if (k == i) continue;
            int best;
            long long cnt, through;
            path_census(g, j, k, i, best, cnt, through);
            if (cnt > 0) raw += static_cast<double>(through) / static_cast<double>(cnt);
        }
    }
    return raw * 2.0 / (static_cast<double>(n) * n - 3.0 * n + 2.0);
}

}  // namespace

TEST_CASE("treated triangles") {
    CHECK(treated_triangles(k3(), TreatmentVector({1, 0, 1}), 0) == 1);
    CHECK(treated_triangles(k3(), TreatmentVector({0, 0, 0}), 0) == 0);
    CHECK(treated_triangles(k4(), TreatmentVector({1, 1, 1, 1}), 0) == 4);
}

TEST_CASE("treated k-stars") {
    CHECK(treated_kstars(k3(), TreatmentVector({1, 0, 0}), 0, 2) == 3);
    CHECK(treated_kstars(star(4), TreatmentVector({1, 1, 1, 1, 1}), 0, 4) == 1);
    Graph edge(2, {{0, 1}});
    CHECK(treated_kstars(edge, TreatmentVector({1, 1}), 0, 2) == 0);
    CHECK_THROWS_AS(treated_kstars(k3(), TreatmentVector({1, 0, 0}), 0, 1), InputError);
}

TEST_CASE("dagger counts") {
    CHECK(dagger(k3(), TreatmentVector({1, 0, 1}), 0, 2) == 3);
    CHECK(dagger(k3(), TreatmentVector({0, 0, 0}), 0, 1) == 0);
    // Star with only the center treated: leaves have a treated neighbor, the
    // center's neighbors are all untreated.
    CHECK(dagger(star(3), TreatmentVector({1, 0, 0, 0}), 0, 1) == 3);
}

TEST_CASE("treated counts vanish without treated units") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Graph g = random_graph(10, 0.3, rng);
        TreatmentVector none(std::vector<std::uint8_t>(10, 0));
        for (int i = 0; i < 10; ++i) {
            CHECK(treated_degree(g, none, i) == 0);
            CHECK(treated_triangles(g, none, i) == 0);
            CHECK(treated_kstars(g, none, i, 2) == 0);
            CHECK(dagger(g, none, i, 2) == 0);
        }
    }
}

TEST_CASE("treated triangles bounded by all triangles") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Graph g = random_graph(10, 0.35, rng);
        std::vector<std::uint8_t> bits(10);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
        TreatmentVector t(std::move(bits));
        TreatmentVector ones(std::vector<std::uint8_t>(10, 1));
        for (int i = 0; i < 10; ++i)
            CHECK(treated_triangles(g, t, i) <= treated_triangles(g, ones, i));
    }
}

TEST_CASE("betweenness on fixtures") {
    CHECK(betweenness(star(3), 0) == Catch::Approx(1.0));
    CHECK(betweenness(k3(), 0) == Catch::Approx(0.0));
    Graph path(3, {{0, 1}, {1, 2}});
    CHECK(betweenness(path, 1) == Catch::Approx(1.0));
    CHECK(betweenness(Graph(2, {{0, 1}}), 0) == 0.0);  // n < 3
}

TEST_CASE("closeness on fixtures") {
    CHECK(closeness(star(3), 0) == Catch::Approx(1.0));
    CHECK(closeness(star(3), 1) == Catch::Approx(0.6));
    CHECK(closeness(k4(), 2) == Catch::Approx(1.0));
    SECTION("disconnected convention") {
        Graph g(4, {{0, 1}});  // component {0,1}, isolated 2 and 3
        CHECK(closeness(g, 0) == Catch::Approx(1.0));  // (2-1)/1
        CHECK(closeness(g, 2) == 0.0);
    }
}

TEST_CASE("centralities agree with brute force on random graphs") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 5 + static_cast<int>(rng() % 6);  // 5..10
        Graph g = random_graph(n, 0.35, rng);
        auto fw = fw_distances(g);
        for (int i = 0; i < n; ++i) {
            CHECK(betweenness(g, i) == Catch::Approx(betweenness_oracle(g, i)).margin(1e-12));
            double total = 0.0;
            int reached = 0;
            for (int j = 0; j < n; ++j) {
                if (j == i || fw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 1e17)
                    continue;
                total += fw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                ++reached;
            }
            const double expect = reached == 0 ? 0.0 : reached / total;
            CHECK(closeness(g, i) == Catch::Approx(expect).margin(1e-12));
        }
    }
}

TEST_CASE("zscore normalization") {
    SECTION("(1,2,3) maps to (-1,0,1) under the sample sd") {
        auto z = zscore_column({1.0, 2.0, 3.0});
        CHECK(z[0] == Catch::Approx(-1.0));
        CHECK(z[1] == Catch::Approx(0.0));
        CHECK(z[2] == Catch::Approx(1.0));
    }
    SECTION("constant columns map to zeros") {
        auto z = zscore_column({4.0, 4.0, 4.0, 4.0});
        for (double v : z) CHECK(v == 0.0);
    }
    SECTION("idempotent to 1e-12") {
        std::mt19937_64 rng(29);
        std::vector<double> x(20);
        std::normal_distribution<double> normal(3.0, 2.5);
        for (auto& v : x) v = normal(rng);
        auto once = zscore_column(x);
        auto twice = zscore_column(once);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(std::abs(once[i] - twice[i]) < 1e-12);
    }
    SECTION("needs at least two units") {
        CHECK_THROWS_AS(zscore_column({1.0}), InputError);
    }
}

TEST_CASE("component matrix layout") {
    std::mt19937_64 rng(41);
    Graph g = random_graph(12, 0.25, rng);
    std::vector<std::uint8_t> bits(12);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
    TreatmentVector t(std::move(bits));

    ComponentMatrix m = interference_components(g, t);
    REQUIRE(m.names == std::vector<std::string>{"treated_degree", "treated_triangles",
                                                "treated_2star", "treated_4star", "dagger3",
                                                "betweenness", "closeness"});
    REQUIRE(m.columns.size() == 7);
    for (const auto& col : m.columns) CHECK(col.size() == 12);
    for (int i = 0; i < 12; ++i) {
        CHECK(m.column("treated_degree")[static_cast<std::size_t>(i)] ==
              static_cast<double>(treated_degree(g, t, i)));
        CHECK(m.column("treated_triangles")[static_cast<std::size_t>(i)] ==
              static_cast<double>(treated_triangles(g, t, i)));
    }

    ComponentOptions whole;
    whole.whole_graph_centralities = true;
    ComponentMatrix w = interference_components(g, t, whole);
    for (int i = 0; i < 12; ++i) {
        CHECK(w.column("betweenness")[static_cast<std::size_t>(i)] ==
              Catch::Approx(betweenness(g, i)));
        CHECK(w.column("closeness")[static_cast<std::size_t>(i)] ==
              Catch::Approx(closeness(g, i)));
    }

    ComponentMatrix z = zscore_normalize(m);
    for (const auto& col : z.columns) {
        double mean = 0.0;
        for (double v : col) mean += v;
        CHECK(std::abs(mean) < 1e-9);
    }
}
