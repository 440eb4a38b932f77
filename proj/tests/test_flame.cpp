#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "netmatch/flame.hpp"

using namespace netmatch;

namespace {

FeatureTable table_from_columns(std::vector<FeatureColumn> cols) {
    FeatureTable t;
    t.n_units = cols.empty() ? 0 : cols[0].values.size();
    t.columns = std::move(cols);
    return t;
}

TreatmentVector half_treated(int n) {
    std::vector<std::uint8_t> t(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n / 2; ++i) t[static_cast<std::size_t>(i)] = 1;
    return TreatmentVector(std::move(t));
}

}  // namespace

TEST_CASE("split_holdout is stratified, clamped and deterministic") {
    FeatureTable features = table_from_columns(
        {FeatureColumn{"a", ColumnKind::Subgraph, std::vector<std::int64_t>(40, 0)}});
    std::vector<double> y(40, 1.0);
    TreatmentVector t = half_treated(40);

    MatchConfig config;
    config.holdout_fraction = 0.3;
    config.seed = 5;
    HoldoutSplit split = split_holdout(features, y, t, config);
    CHECK(split.holdout_ids.size() == 12);
    CHECK(split.match_ids.size() == 28);
    int arms[2][2] = {{0, 0}, {0, 0}};
    for (int u : split.match_ids) ++arms[0][t[u]];
    for (int u : split.holdout_ids) ++arms[1][t[u]];
    CHECK(arms[0][0] == 14);
    CHECK(arms[0][1] == 14);
    CHECK(arms[1][0] == 6);
    CHECK(arms[1][1] == 6);

    HoldoutSplit again = split_holdout(features, y, t, config);
    CHECK(again.holdout_ids == split.holdout_ids);

    SECTION("fraction outside (0,1) is rejected") {
        config.holdout_fraction = 0.0;
        CHECK_THROWS_AS(split_holdout(features, y, t, config), InputError);
        config.holdout_fraction = 1.0;
        CHECK_THROWS_AS(split_holdout(features, y, t, config), InputError);
    }
    SECTION("explicit ids are respected verbatim") {
        config.holdout_ids = {0, 1, 20, 21};
        HoldoutSplit explicit_split = split_holdout(features, y, t, config);
        CHECK(explicit_split.holdout_ids == std::vector<int>{0, 1, 20, 21});
        CHECK(explicit_split.match_ids.size() == 36);
    }
    SECTION("too few units to stratify") {
        FeatureTable tiny = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, std::vector<std::int64_t>(3, 0)}});
        std::vector<double> ty(3, 0.0);
        TreatmentVector tt({1, 0, 0});
        MatchConfig c2;
        CHECK_THROWS_AS(split_holdout(tiny, ty, tt, c2), InputError);
    }
}

TEST_CASE("exact_match groups by signature and requires both arms") {
    SECTION("two identical units of opposite arms form one group") {
        FeatureTable features = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, {3, 3}}});
        std::vector<double> y{1.0, 5.0};
        TreatmentVector t({1, 0});
        std::vector<std::size_t> active{0};
        std::vector<int> pool{0, 1};
        auto groups = exact_match(features, active, pool, t, y);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].members == std::vector<int>{0, 1});
        CHECK(groups[0].treated_mean == 1.0);
        CHECK(groups[0].control_mean == 5.0);
    }
    SECTION("an all-treated pool yields no groups") {
        FeatureTable features = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, {1, 1, 1}}});
        std::vector<double> y{1, 2, 3};
        TreatmentVector t({1, 1, 1});
        std::vector<std::size_t> active{0};
        std::vector<int> pool{0, 1, 2};
        CHECK(exact_match(features, active, pool, t, y).empty());
    }
    SECTION("group forms only where both arms share the signature") {
        // Signature A has (T,C,C); signature B has a lone treated unit.
        FeatureTable features = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, {1, 1, 1, 2}}});
        std::vector<double> y{4, 2, 6, 9};
        TreatmentVector t({1, 0, 0, 1});
        std::vector<std::size_t> active{0};
        std::vector<int> pool{0, 1, 2, 3};
        auto groups = exact_match(features, active, pool, t, y);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].members == std::vector<int>{0, 1, 2});
        CHECK(groups[0].difference() == Catch::Approx(0.0));
        CHECK(exact_match_sound(features, groups[0]));
    }
    SECTION("empty active set pools everyone") {
        FeatureTable features = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, {1, 2, 3}}});
        std::vector<double> y{1, 2, 3};
        TreatmentVector t({1, 0, 0});
        std::vector<int> pool{0, 1, 2};
        auto groups = exact_match(features, {}, pool, t, y);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].members.size() == 3);
    }
}

TEST_CASE("balancing factor") {
    FeatureTable features = table_from_columns(
        {FeatureColumn{"a", ColumnKind::Subgraph, std::vector<std::int64_t>(20, 0)}});
    TreatmentVector t = half_treated(20);
    std::vector<int> pool(20);
    for (int i = 0; i < 20; ++i) pool[static_cast<std::size_t>(i)] = i;

    SECTION("4 of 10 treated and 6 of 10 control give 1.0") {
        MatchedGroup grp;
        grp.treated_count = 4;
        grp.control_count = 6;
        CHECK(balancing_factor({grp}, pool, t) == Catch::Approx(1.0));
    }
    SECTION("nothing matched gives 0, everything matched gives 2") {
        CHECK(balancing_factor({}, pool, t) == 0.0);
        MatchedGroup grp;
        grp.treated_count = 10;
        grp.control_count = 10;
        CHECK(balancing_factor({grp}, pool, t) == Catch::Approx(2.0));
    }
}

TEST_CASE("pe_outcome") {
    SECTION("constant outcome is absorbed by the intercept") {
        FeatureTable features = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, {0, 1, 2, 0, 1, 2}}});
        std::vector<double> y(6, 4.0);
        TreatmentVector t({1, 1, 1, 0, 0, 0});
        std::vector<int> holdout{0, 1, 2, 3, 4, 5};
        std::vector<std::size_t> active{0};
        CHECK(pe_outcome(features, y, t, holdout, active, 0.1) < 1e-6);
    }
    SECTION("outcome equal to a retained binary feature fits exactly as lambda -> 0") {
        FeatureTable features = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, {0, 1, 0, 1, 0, 1}}});
        std::vector<double> y{0, 1, 0, 1, 0, 1};
        TreatmentVector t({1, 1, 1, 0, 0, 0});
        std::vector<int> holdout{0, 1, 2, 3, 4, 5};
        std::vector<std::size_t> active{0};
        CHECK(pe_outcome(features, y, t, holdout, active, 1e-10) < 1e-8);
    }
    SECTION("pure noise leaves roughly the total sum of squares") {
        std::mt19937_64 rng(77);
        std::normal_distribution<double> normal(0.0, 1.0);
        const int n = 80;
        std::vector<std::int64_t> feature(static_cast<std::size_t>(n));
        std::vector<double> y(static_cast<std::size_t>(n));
        std::vector<std::uint8_t> arm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            feature[static_cast<std::size_t>(i)] = i % 2;
            y[static_cast<std::size_t>(i)] = normal(rng);
            arm[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i % 2);
        }
        FeatureTable features =
            table_from_columns({FeatureColumn{"a", ColumnKind::Subgraph, feature}});
        TreatmentVector t(std::move(arm));
        std::vector<int> holdout(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) holdout[static_cast<std::size_t>(i)] = i;
        std::vector<std::size_t> active{0};

        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= n;
        double sst = 0.0;
        for (double v : y) sst += (v - mean) * (v - mean);
        const double pe = pe_outcome(features, y, t, holdout, active, 0.1);
        CHECK(pe > 0.9 * sst * 0.9);  // within 10% after mild overfitting slack
        CHECK(pe <= sst * 1.001);
    }
    SECTION("negative penalty is rejected") {
        FeatureTable features = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, {0, 1}}});
        std::vector<double> y{0, 1};
        TreatmentVector t({1, 0});
        std::vector<int> holdout{0, 1};
        CHECK_THROWS_AS(pe_outcome(features, y, t, holdout, {}, -1.0), InputError);
    }
}

TEST_CASE("pe_network") {
    SECTION("intercept-only AIC matches the closed form") {
        Graph g(5, {{0, 1}, {1, 2}, {3, 4}});  // 3 edges of 10 pairs
        std::vector<std::vector<std::int64_t>> counts(5);  // zero columns
        PeNetworkResult res = pe_network(g, counts, {});
        const double phat = 0.3;
        const double ll = 3 * std::log(phat) + 7 * std::log(1 - phat);
        CHECK(res.parameters == 1);
        CHECK(res.aic == Catch::Approx(2.0 - 2.0 * ll).margin(1e-6));
    }
    SECTION("aic definition") { CHECK(aic_value(3, -10.0) == Catch::Approx(26.0)); }
    SECTION("adding a feature never increases the optimal deviance") {
        std::mt19937_64 rng(123);
        Graph g = [&] {
            std::vector<std::pair<int, int>> edges;
            for (int i = 0; i < 12; ++i)
                for (int j = i + 1; j < 12; ++j)
                    if (rng() % 4 == 0) edges.emplace_back(i, j);
            return Graph(12, edges);
        }();
        std::vector<std::vector<std::int64_t>> counts(12, std::vector<std::int64_t>(2, 0));
        for (int i = 0; i < 12; ++i) {
            counts[static_cast<std::size_t>(i)][0] = g.degree(i);
            counts[static_cast<std::size_t>(i)][1] = static_cast<std::int64_t>(rng() % 5);
        }
        std::vector<std::size_t> small{0}, large{0, 1};
        PeNetworkResult rs = pe_network(g, counts, small);
        PeNetworkResult rl = pe_network(g, counts, large);
        CHECK(-2.0 * rl.log_likelihood <= -2.0 * rs.log_likelihood + 1e-6);
    }
}

TEST_CASE("estimate_ade") {
    MatchedGroup g1;
    g1.members = {0, 1, 2, 3};
    g1.treated_count = 2;
    g1.control_count = 2;
    g1.treated_mean = 3.0;
    g1.control_mean = 1.0;  // diff 2, size 4
    MatchedGroup g2;
    g2.members = {4, 5};
    g2.treated_count = 1;
    g2.control_count = 1;
    g2.treated_mean = 6.0;
    g2.control_mean = 1.0;  // diff 5, size 2
    CHECK(estimate_ade(std::vector<MatchedGroup>{g1, g2}) == Catch::Approx(3.0));
    CHECK(estimate_ade(std::vector<MatchedGroup>{g2}) == Catch::Approx(5.0));
    CHECK(estimate_ade(std::vector<MatchedGroup>{g1, g2}, true) ==
          Catch::Approx((2 * 2.0 + 1 * 5.0) / 3.0));
    SECTION("equal differences are weight-invariant") {
        g2.treated_mean = 3.0;  // diff 2 as well
        CHECK(estimate_ade(std::vector<MatchedGroup>{g1, g2}) == Catch::Approx(2.0));
        CHECK(estimate_ade(std::vector<MatchedGroup>{g1, g2}, true) == Catch::Approx(2.0));
    }
    SECTION("no groups is an estimation error") {
        CHECK_THROWS_AS(estimate_ade(std::vector<MatchedGroup>{}), EstimationError);
    }
}

namespace {

// A 12-unit fixture: one informative covariate shared across arms, one noise
// covariate unique per unit (blocks all matches until dropped), plus a
// graph and census so the network term is well-defined.
struct FlameFixture {
    FeatureTable features;
    std::vector<double> y;
    TreatmentVector t;
    Graph graph;
    std::vector<std::vector<std::int64_t>> counts;
    MatchConfig config;
};

FlameFixture make_fixture() {
    FlameFixture f;
    const int n = 12;
    std::vector<std::int64_t> informative, noise;
    std::vector<std::uint8_t> arm;
    f.y.clear();
    for (int i = 0; i < n; ++i) {
        informative.push_back(i % 2);           // two levels, both arms in each
        noise.push_back(i);                     // unique per unit
        arm.push_back(static_cast<std::uint8_t>(i < n / 2));
        f.y.push_back(5.0 * (i < n / 2) + 2.0 * (i % 2));
    }
    informative[5] = 6;   // a treated and a control straggler that only the
    informative[11] = 7;  // final all-dropped round can place in a group
    f.features = table_from_columns({FeatureColumn{"a_info", ColumnKind::Subgraph, informative},
                                     FeatureColumn{"b_noise", ColumnKind::Subgraph, noise}});
    f.t = TreatmentVector(std::move(arm));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; i += 2) edges.emplace_back(i, i + 1);
    f.graph = Graph(n, edges);
    f.counts.assign(n, std::vector<std::int64_t>(2, 0));
    for (int i = 0; i < n; ++i) {
        f.counts[static_cast<std::size_t>(i)][0] = informative[static_cast<std::size_t>(i)];
        f.counts[static_cast<std::size_t>(i)][1] = noise[static_cast<std::size_t>(i)];
    }
    f.config.holdout_ids = {0, 1, 6, 7};  // keep the match pool deterministic
    return f;
}

}  // namespace

TEST_CASE("run_flame") {
    SECTION("identical censuses match in round zero with an empty drop log") {
        FeatureTable features = table_from_columns(
            {FeatureColumn{"a", ColumnKind::Subgraph, {1, 1, 2, 2, 1, 1, 2, 2}}});
        std::vector<double> y{5, 5, 8, 8, 1, 1, 2, 2};
        TreatmentVector t({1, 1, 1, 1, 0, 0, 0, 0});
        Graph g(8, {});
        std::vector<std::vector<std::int64_t>> counts(8, std::vector<std::int64_t>(1, 0));
        for (int i = 0; i < 8; ++i) counts[static_cast<std::size_t>(i)][0] = (i % 4 < 2) ? 1 : 2;
        MatchConfig config;
        config.holdout_ids = {0, 3, 4, 7};
        MatchResult res = run_flame(features, y, t, g, counts, config);
        CHECK(res.drop_log.empty());
        CHECK(res.unmatched.empty());
        REQUIRE(res.ade_defined);
        CHECK(res.ade == Catch::Approx(0.5 * (5.0 - 1.0) + 0.5 * (8.0 - 2.0)));
        for (const auto& grp : res.groups) CHECK(grp.iteration == 0);
    }

    SECTION("a match-blocking noise covariate is dropped first") {
        FlameFixture f = make_fixture();
        MatchResult res = run_flame(f.features, f.y, f.t, f.graph, f.counts, f.config);
        REQUIRE(!res.drop_log.empty());
        CHECK(res.drop_log[0].dropped_column == "b_noise");
        REQUIRE(res.ade_defined);
        CHECK(res.ade == Catch::Approx(5.0));  // exact match on the informative level
        for (const auto& grp : res.groups) CHECK(exact_match_sound(f.features, grp));
    }

    SECTION("exhaust-covariates ends with the everyone group") {
        FlameFixture f = make_fixture();
        f.config.stop = StopRule::ExhaustCovariates;
        MatchResult res = run_flame(f.features, f.y, f.t, f.graph, f.counts, f.config);
        CHECK(res.drop_log.size() == 2);
        REQUIRE(!res.groups.empty());
        const auto& last = res.groups.back();
        CHECK(last.active_columns.empty());
        CHECK(res.unmatched.empty());
    }

    SECTION("matched set is non-decreasing and units are never rematched") {
        FlameFixture f = make_fixture();
        f.config.stop = StopRule::ExhaustCovariates;
        MatchResult res = run_flame(f.features, f.y, f.t, f.graph, f.counts, f.config);
        std::vector<int> seen;
        int last_iteration = 0;
        for (const auto& grp : res.groups) {
            CHECK(grp.iteration >= last_iteration);
            last_iteration = grp.iteration;
            for (int u : grp.members) {
                CHECK(std::find(seen.begin(), seen.end(), u) == seen.end());
                seen.push_back(u);
            }
        }
    }

    SECTION("deterministic across runs") {
        FlameFixture f = make_fixture();
        MatchResult a = run_flame(f.features, f.y, f.t, f.graph, f.counts, f.config);
        MatchResult b = run_flame(f.features, f.y, f.t, f.graph, f.counts, f.config);
        REQUIRE(a.drop_log.size() == b.drop_log.size());
        for (std::size_t i = 0; i < a.drop_log.size(); ++i) {
            CHECK(a.drop_log[i].dropped_column == b.drop_log[i].dropped_column);
            CHECK(a.drop_log[i].match_quality == b.drop_log[i].match_quality);
        }
        CHECK(a.ade == b.ade);
    }

    SECTION("missing arm is an input error") {
        FlameFixture f = make_fixture();
        TreatmentVector all_treated(std::vector<std::uint8_t>(12, 1));
        CHECK_THROWS_AS(run_flame(f.features, f.y, all_treated, f.graph, f.counts, f.config),
                        InputError);
    }
}

TEST_CASE("flame greedy drop sequence equals per-round brute-force argmax") {
    // <= 4 covariates, <= 12 units: recompute every candidate MQ with the
    // public operations and follow the argmax; the sequences must agree.
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 12;
        std::vector<FeatureColumn> cols;
        const char* names[4] = {"c0", "c1", "c2", "c3"};
        for (int c = 0; c < 4; ++c) {
            std::vector<std::int64_t> vals;
            for (int i = 0; i < n; ++i) vals.push_back(static_cast<std::int64_t>(rng() % 3));
            cols.push_back(FeatureColumn{names[c], ColumnKind::Subgraph, vals});
        }
        FeatureTable features = table_from_columns(cols);
        std::vector<double> y;
        std::vector<std::uint8_t> arm;
        for (int i = 0; i < n; ++i) {
            arm.push_back(static_cast<std::uint8_t>(i % 2));
            y.push_back(static_cast<double>(rng() % 100) / 10.0 + 5.0 * (i % 2));
        }
        TreatmentVector t(std::move(arm));
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng() % 3 == 0) edges.emplace_back(i, j);
        Graph g(n, edges);
        std::vector<std::vector<std::int64_t>> counts(n, std::vector<std::int64_t>(4, 0));
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 4; ++c)
                counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
                    features.columns[static_cast<std::size_t>(c)]
                        .values[static_cast<std::size_t>(i)];

        MatchConfig config;
        config.holdout_ids = {0, 1, 2, 3};
        config.stop = StopRule::ExhaustCovariates;
        MatchResult res = run_flame(features, y, t, g, counts, config);

        // Oracle: replay the rounds with fresh evaluations of each component.
        std::vector<int> pool;
        for (int i = 4; i < n; ++i) pool.push_back(i);
        std::vector<std::size_t> active{0, 1, 2, 3};
        auto remove_matched = [&](const std::vector<MatchedGroup>& groups) {
            for (const auto& grp : groups)
                for (int u : grp.members)
                    pool.erase(std::remove(pool.begin(), pool.end(), u), pool.end());
        };
        remove_matched(exact_match(features, active, pool, t, y));

        for (const auto& entry : res.drop_log) {
            double best_mq = -1e300;
            std::size_t best_col = 0;
            for (std::size_t k = 0; k < active.size(); ++k) {
                std::vector<std::size_t> reduced;
                for (std::size_t a = 0; a < active.size(); ++a)
                    if (a != k) reduced.push_back(active[a]);
                auto tentative = exact_match(features, reduced, pool, t, y);
                const double bf = balancing_factor(tentative, pool, t);
                const double pey = pe_outcome(features, y, t, config.holdout_ids, reduced,
                                              config.ridge_lambda);
                std::vector<std::size_t> edge_cols(reduced.begin(), reduced.end());
                const double aic = pe_network(g, counts, edge_cols).aic;
                const double mq = config.balance_weight * bf - pey - config.network_weight * aic;
                if (mq > best_mq ||
                    (mq == best_mq && features.columns[active[k]].name <
                                          features.columns[best_col].name)) {
                    best_mq = mq;
                    best_col = active[k];
                }
            }
            CHECK(features.columns[best_col].name == entry.dropped_column);
            CHECK(best_mq == Catch::Approx(entry.match_quality).margin(1e-6));
            active.erase(std::remove(active.begin(), active.end(), best_col), active.end());
            remove_matched(exact_match(features, active, pool, t, y));
        }
    }
}
