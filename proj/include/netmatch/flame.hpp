#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "netmatch/census.hpp"
#include "netmatch/graph.hpp"
#include "netmatch/linalg.hpp"
#include "netmatch/parallel.hpp"

namespace netmatch {

enum class PeGSign {
    RewardFit,  // MQ = C*BF - PE_Y - D*AIC (lower AIC is better)
    Literal,    // MQ = C*BF - PE_Y + D*AIC
};

enum class StopRule {
    AllTreatedMatched,
    ExhaustCovariates,
    MqDrop,
};

struct MatchConfig {
    double balance_weight = 0.1;   // C
    double network_weight = 1.0;   // D
    double ridge_lambda = 0.1;
    double holdout_fraction = 0.3;
    std::vector<int> holdout_ids;  // explicit holdout; overrides the fraction when nonempty
    std::uint64_t seed = 0;
    PeGSign pe_g_sign = PeGSign::RewardFit;
    StopRule stop = StopRule::MqDrop;
    // MqDrop: stop once the best drop's MQ falls below the best MQ seen so far
    // (starting from the no-drop model) by more than this fraction of its size.
    double mq_drop_fraction = 0.05;
    bool weight_groups_by_treated = false;
};

struct MatchedGroup {
    std::vector<std::size_t> active_columns;  // feature column indices at formation
    std::vector<std::int64_t> signature;      // values aligned with active_columns
    std::vector<int> members;
    int iteration = 0;
    int treated_count = 0;
    int control_count = 0;
    double treated_mean = 0.0;
    double control_mean = 0.0;

    double difference() const { return treated_mean - control_mean; }
};

struct DropLogEntry {
    int iteration = 0;
    std::string dropped_column;
    double balancing_factor = 0.0;
    double pe_outcome = 0.0;
    double pe_network = 0.0;  // AIC of the edge model on the reduced set
    double match_quality = 0.0;
};

struct MatchResult {
    std::vector<MatchedGroup> groups;
    std::vector<DropLogEntry> drop_log;
    std::vector<int> unmatched;  // match-set units never placed in a group
    std::vector<int> holdout;
    double ade = std::numeric_limits<double>::quiet_NaN();
    bool ade_defined = false;
    std::vector<std::string> warnings;
};

struct HoldoutSplit {
    std::vector<int> match_ids;
    std::vector<int> holdout_ids;
};

// Arm-stratified holdout split, deterministic under the config seed. Explicit
// holdout ids are honored verbatim.
inline HoldoutSplit split_holdout(const FeatureTable& features, std::span<const double> y,
                                  const TreatmentVector& t, const MatchConfig& config) {
    const int n = static_cast<int>(features.n_units);
    if (y.size() != features.n_units || t.size() != features.n_units)
        throw InputError("split_holdout: outcome/treatment length mismatch");

    HoldoutSplit split;
    if (!config.holdout_ids.empty()) {
        std::vector<char> is_holdout(static_cast<std::size_t>(n), 0);
        for (int id : config.holdout_ids) {
            if (id < 0 || id >= n) throw InputError("split_holdout: holdout id out of range");
            if (is_holdout[static_cast<std::size_t>(id)])
                throw InputError("split_holdout: duplicate holdout id");
            is_holdout[static_cast<std::size_t>(id)] = 1;
        }
        int arm_counts[2][2] = {{0, 0}, {0, 0}};  // [holdout?][arm]
        for (int i = 0; i < n; ++i) {
            (is_holdout[static_cast<std::size_t>(i)] ? split.holdout_ids : split.match_ids).push_back(i);
            ++arm_counts[is_holdout[static_cast<std::size_t>(i)] ? 1 : 0][t[i]];
        }
        if (!arm_counts[0][0] || !arm_counts[0][1] || !arm_counts[1][0] || !arm_counts[1][1])
            throw InputError("split_holdout: both arms must be present in both splits");
        return split;
    }

    if (!(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0))
        throw InputError("split_holdout: holdout fraction must be in (0,1)");

    std::vector<int> arm[2];
    for (int i = 0; i < n; ++i) arm[t[i]].push_back(i);
    if (arm[0].size() < 2 || arm[1].size() < 2)
        throw InputError("split_holdout: too few units to stratify by arm");

    std::mt19937_64 rng(config.seed);
    for (auto& ids : arm) {
        for (std::size_t i = ids.size(); i > 1; --i)
            std::swap(ids[i - 1], ids[rng() % i]);
        auto k = static_cast<std::size_t>(std::lround(config.holdout_fraction *
                                                      static_cast<double>(ids.size())));
        k = std::max<std::size_t>(1, std::min(k, ids.size() - 1));
        split.holdout_ids.insert(split.holdout_ids.end(), ids.begin(), ids.begin() + static_cast<long>(k));
        split.match_ids.insert(split.match_ids.end(), ids.begin() + static_cast<long>(k), ids.end());
    }
    std::sort(split.holdout_ids.begin(), split.holdout_ids.end());
    std::sort(split.match_ids.begin(), split.match_ids.end());
    return split;
}

// Group-by on the active-covariate signatures of the pooled units; signatures
// with both arms become matched groups.
inline std::vector<MatchedGroup> exact_match(const FeatureTable& features,
                                             std::span<const std::size_t> active,
                                             std::span<const int> pool, const TreatmentVector& t,
                                             std::span<const double> y, int iteration = 0) {
    std::map<std::vector<std::int64_t>, std::vector<int>> buckets;
    std::vector<std::int64_t> key(active.size());
    for (int u : pool) {
        for (std::size_t a = 0; a < active.size(); ++a)
            key[a] = features.columns[active[a]].values[static_cast<std::size_t>(u)];
        buckets[key].push_back(u);
    }
    std::vector<MatchedGroup> groups;
    for (auto& [sig, members] : buckets) {
        MatchedGroup grp;
        grp.iteration = iteration;
        grp.active_columns.assign(active.begin(), active.end());
        grp.signature = sig;
        grp.members = members;
        double sum_t = 0.0, sum_c = 0.0;
        for (int u : members) {
            if (t.treated(u)) {
                ++grp.treated_count;
                sum_t += y[static_cast<std::size_t>(u)];
            } else {
                ++grp.control_count;
                sum_c += y[static_cast<std::size_t>(u)];
            }
        }
        if (grp.treated_count == 0 || grp.control_count == 0) continue;
        grp.treated_mean = sum_t / grp.treated_count;
        grp.control_mean = sum_c / grp.control_count;
        groups.push_back(std::move(grp));
    }
    return groups;
}

// Proportion of pooled treated plus proportion of pooled control units that
// the given groups would match.
inline double balancing_factor(const std::vector<MatchedGroup>& new_groups,
                               std::span<const int> pool, const TreatmentVector& t) {
    int pool_arm[2] = {0, 0};
    for (int u : pool) ++pool_arm[t[u]];
    int matched_arm[2] = {0, 0};
    for (const auto& grp : new_groups) {
        matched_arm[0] += grp.control_count;
        matched_arm[1] += grp.treated_count;
    }
    double bf = 0.0;
    if (pool_arm[1] > 0) bf += static_cast<double>(matched_arm[1]) / pool_arm[1];
    if (pool_arm[0] > 0) bf += static_cast<double>(matched_arm[0]) / pool_arm[0];
    return bf;
}

// Holdout squared error of a ridge fit of Y on one-hot encodings of the active
// columns plus treatment and an (unpenalized) intercept.
inline double pe_outcome(const FeatureTable& features, std::span<const double> y,
                         const TreatmentVector& t, std::span<const int> holdout,
                         std::span<const std::size_t> active, double lambda) {
    if (lambda < 0.0) throw InputError("pe_outcome: ridge penalty must be >= 0");
    std::vector<std::vector<std::int64_t>> levels(active.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
        auto& lv = levels[a];
        for (int u : holdout) lv.push_back(features.columns[active[a]].values[static_cast<std::size_t>(u)]);
        std::sort(lv.begin(), lv.end());
        lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    }
    std::size_t d = 2;
    for (const auto& lv : levels) d += lv.size();

    Matrix X(holdout.size(), d);
    std::vector<double> yy(holdout.size());
    for (std::size_t r = 0; r < holdout.size(); ++r) {
        const int u = holdout[r];
        yy[r] = y[static_cast<std::size_t>(u)];
        X(r, 0) = 1.0;
        X(r, 1) = t.treated(u) ? 1.0 : 0.0;
        std::size_t offset = 2;
        for (std::size_t a = 0; a < active.size(); ++a) {
            const auto v = features.columns[active[a]].values[static_cast<std::size_t>(u)];
            const auto it = std::lower_bound(levels[a].begin(), levels[a].end(), v);
            X(r, offset + static_cast<std::size_t>(it - levels[a].begin())) = 1.0;
            offset += levels[a].size();
        }
    }
    std::vector<double> penalty(d, lambda);
    penalty[0] = 0.0;  // intercept and treatment unpenalized
    penalty[1] = 0.0;
    return ridge_fit(X, yy, penalty).sse;
}

struct PeNetworkResult {
    double aic = 0.0;
    double log_likelihood = 0.0;
    int parameters = 0;
    bool converged = true;
};

inline double aic_value(int parameters, double log_likelihood) {
    return 2.0 * parameters - 2.0 * log_likelihood;
}

namespace detail {

// Shared edge-model machinery: one row per unordered unit pair, with the
// symmetrized subgraph counts S(i)+S(j) as features.
struct EdgeModelCache {
    std::size_t n_pairs = 0;
    std::size_t n_cols = 0;                // subgraph columns
    std::vector<double> features;          // n_pairs x n_cols, row-major
    std::vector<std::uint8_t> edge;

    EdgeModelCache(const Graph& g, const std::vector<std::vector<std::int64_t>>& counts) {
        const int n = g.vertex_count();
        if (counts.size() != static_cast<std::size_t>(n))
            throw InputError("edge model: count matrix row count must equal vertex count");
        n_cols = counts.empty() ? 0 : counts[0].size();
        n_pairs = static_cast<std::size_t>(n) * (n - 1) / 2;
        features.resize(n_pairs * n_cols);
        edge.resize(n_pairs);
        std::size_t r = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++r) {
                edge[r] = g.has_edge(i, j) ? 1 : 0;
                for (std::size_t k = 0; k < n_cols; ++k)
                    features[r * n_cols + k] =
                        static_cast<double>(counts[static_cast<std::size_t>(i)][k] +
                                            counts[static_cast<std::size_t>(j)][k]);
            }
    }

    PeNetworkResult fit(std::span<const std::size_t> cols, const LogisticOptions& opts,
                        std::vector<double>* beta_out = nullptr) const {
        Matrix X(n_pairs, cols.size() + 1);
        for (std::size_t r = 0; r < n_pairs; ++r) {
            X(r, 0) = 1.0;
            for (std::size_t k = 0; k < cols.size(); ++k)
                X(r, k + 1) = features[r * n_cols + cols[k]];
        }
        LogisticFit lf = logistic_fit(X, edge, opts);
        if (beta_out) *beta_out = lf.beta;
        PeNetworkResult out;
        out.parameters = static_cast<int>(cols.size()) + 1;
        out.log_likelihood = lf.log_likelihood;
        out.converged = lf.converged;
        out.aic = aic_value(out.parameters, out.log_likelihood);
        return out;
    }
};

}  // namespace detail

// AIC of a Bernoulli edge model over all unordered pairs, with success
// probability sigmoid(intercept + beta' (S_masked(i) + S_masked(j))).
inline PeNetworkResult pe_network(const Graph& g,
                                  const std::vector<std::vector<std::int64_t>>& counts,
                                  std::span<const std::size_t> active_cols,
                                  const LogisticOptions& opts = {}) {
    detail::EdgeModelCache cache(g, counts);
    for (std::size_t c : active_cols)
        if (c >= cache.n_cols) throw InputError("pe_network: column index out of range");
    return cache.fit(active_cols, opts);
}

// Size-weighted mean of within-group treated-control outcome differences.
inline double estimate_ade(const std::vector<MatchedGroup>& groups,
                           bool weight_by_treated = false) {
    if (groups.empty()) throw EstimationError("estimate_ade: no matched groups");
    double num = 0.0, den = 0.0;
    for (const auto& grp : groups) {
        const double w = weight_by_treated ? grp.treated_count
                                           : static_cast<double>(grp.members.size());
        num += w * grp.difference();
        den += w;
    }
    return num / den;
}

inline double estimate_ade(const MatchResult& result, bool weight_by_treated = false) {
    return estimate_ade(result.groups, weight_by_treated);
}

// FLAME backward elimination: round 0 exact-matches on every covariate, then
// each round drops the covariate maximizing MQ = C*BF - PE_Y -/+ D*PE_G and
// matches newly matchable units. Matched units are never rematched.
inline MatchResult run_flame(const FeatureTable& features, std::span<const double> y,
                             const TreatmentVector& t, const Graph& graph,
                             const std::vector<std::vector<std::int64_t>>& counts,
                             const MatchConfig& config = {}) {
    if (features.columns.empty()) throw InputError("run_flame: feature table is empty");
    if (features.n_units != static_cast<std::size_t>(graph.vertex_count()))
        throw InputError("run_flame: feature table and graph disagree on unit count");
    require_compatible(graph, t);
    if (t.count_treated() == 0 || t.count_treated() == static_cast<int>(t.size()))
        throw InputError("run_flame: both arms must be present");

    std::vector<std::size_t> subgraph_cols;  // feature column -> edge-model column
    std::vector<std::ptrdiff_t> feature_to_edge(features.columns.size(), -1);
    for (std::size_t c = 0; c < features.columns.size(); ++c)
        if (features.columns[c].kind == ColumnKind::Subgraph) {
            feature_to_edge[c] = static_cast<std::ptrdiff_t>(subgraph_cols.size());
            subgraph_cols.push_back(c);
        }
    const std::size_t n_edge_cols = counts.empty() ? 0 : counts[0].size();
    if (n_edge_cols != subgraph_cols.size())
        throw InputError("run_flame: count matrix does not match subgraph columns");

    MatchResult result;
    HoldoutSplit split = split_holdout(features, y, t, config);
    result.holdout = split.holdout_ids;
    std::vector<int> pool = split.match_ids;

    std::vector<std::size_t> active(features.columns.size());
    for (std::size_t c = 0; c < active.size(); ++c) active[c] = c;

    auto commit = [&](std::vector<MatchedGroup>&& groups) {
        std::vector<int> matched;
        for (auto& grp : groups) {
            matched.insert(matched.end(), grp.members.begin(), grp.members.end());
            result.groups.push_back(std::move(grp));
        }
        std::sort(matched.begin(), matched.end());
        std::vector<int> remaining;
        std::set_difference(pool.begin(), pool.end(), matched.begin(), matched.end(),
                            std::back_inserter(remaining));
        pool = std::move(remaining);
    };

    auto unmatched_treated = [&] {
        int c = 0;
        for (int u : pool) c += t[u];
        return c;
    };

    const auto signed_network = [&](double aic) {
        return config.pe_g_sign == PeGSign::Literal ? config.network_weight * aic
                                                    : -config.network_weight * aic;
    };

    auto round0 = exact_match(features, active, pool, t, y, 0);
    const double bf0 = balancing_factor(round0, pool, t);
    commit(std::move(round0));

    detail::EdgeModelCache edge_cache(graph, counts);
    std::vector<double> warm_full(1 + n_edge_cols, 0.0);  // [intercept, per edge column]
    double reference_mq;
    {
        std::vector<std::size_t> all_cols(n_edge_cols);
        for (std::size_t k = 0; k < n_edge_cols; ++k) all_cols[k] = k;
        std::vector<double> beta;
        LogisticOptions opts;
        PeNetworkResult base = edge_cache.fit(all_cols, opts, &beta);
        if (!base.converged)
            result.warnings.push_back("edge model did not converge on the full column set");
        warm_full[0] = beta[0];
        for (std::size_t k = 0; k < n_edge_cols; ++k) warm_full[k + 1] = beta[k + 1];
        // Quality of the no-drop model, the starting reference for MqDrop.
        const double pey0 =
            pe_outcome(features, y, t, result.holdout, active, config.ridge_lambda);
        reference_mq = config.balance_weight * bf0 - pey0 + signed_network(base.aic);
    }

    struct Candidate {
        double bf = 0.0, pey = 0.0, aic = 0.0, mq = 0.0;
        std::vector<double> beta;
        std::vector<std::size_t> edge_cols;
        bool converged = true;
    };

    int iteration = 0;
    while (true) {
        // Exhaust mode keeps dropping to record the full importance ordering;
        // the other rules have nothing to gain once every treated unit is placed.
        if (config.stop != StopRule::ExhaustCovariates && unmatched_treated() == 0) break;
        if (active.empty()) break;
        ++iteration;

        std::vector<Candidate> cands(active.size());
        parallel_for(active.size(), [&](std::size_t idx) {
            Candidate& cand = cands[idx];
            std::vector<std::size_t> reduced;
            reduced.reserve(active.size() - 1);
            for (std::size_t a = 0; a < active.size(); ++a)
                if (a != idx) reduced.push_back(active[a]);

            auto tentative = exact_match(features, reduced, pool, t, y, iteration);
            cand.bf = balancing_factor(tentative, pool, t);
            cand.pey = pe_outcome(features, y, t, result.holdout, reduced, config.ridge_lambda);

            std::vector<double> warm{warm_full[0]};
            for (std::size_t c : reduced)
                if (feature_to_edge[c] >= 0) {
                    cand.edge_cols.push_back(static_cast<std::size_t>(feature_to_edge[c]));
                    warm.push_back(warm_full[static_cast<std::size_t>(feature_to_edge[c]) + 1]);
                }
            LogisticOptions opts;
            opts.warm_start = &warm;
            PeNetworkResult pn = edge_cache.fit(cand.edge_cols, opts, &cand.beta);
            cand.aic = pn.aic;
            cand.converged = pn.converged;

            cand.mq = config.balance_weight * cand.bf - cand.pey + signed_network(cand.aic);
        });

        std::size_t best = 0;
        for (std::size_t idx = 1; idx < cands.size(); ++idx) {
            if (cands[idx].mq > cands[best].mq ||
                (cands[idx].mq == cands[best].mq &&
                 features.columns[active[idx]].name < features.columns[active[best]].name))
                best = idx;
        }
        if (config.stop == StopRule::MqDrop &&
            cands[best].mq <
                reference_mq - config.mq_drop_fraction * std::abs(reference_mq))
            break;
        reference_mq = std::max(reference_mq, cands[best].mq);

        if (!cands[best].converged)
            result.warnings.push_back("edge model did not converge at iteration " +
                                      std::to_string(iteration) + " (possible separation)");

        result.drop_log.push_back({iteration, features.columns[active[best]].name, cands[best].bf,
                                   cands[best].pey, cands[best].aic, cands[best].mq});

        warm_full.assign(1 + n_edge_cols, 0.0);
        warm_full[0] = cands[best].beta.empty() ? 0.0 : cands[best].beta[0];
        for (std::size_t k = 0; k < cands[best].edge_cols.size(); ++k)
            warm_full[cands[best].edge_cols[k] + 1] = cands[best].beta[k + 1];

        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best));
        // The empty-signature round (everything dropped, everyone pooled) is
        // only meaningful under the exhaust-covariates rule; otherwise units
        // without an exact match on some nonempty covariate set stay unmatched.
        if (!active.empty() || config.stop == StopRule::ExhaustCovariates)
            commit(exact_match(features, active, pool, t, y, iteration));
    }

    result.unmatched = pool;
    if (!result.groups.empty()) {
        result.ade = estimate_ade(result.groups, config.weight_groups_by_treated);
        result.ade_defined = true;
    } else {
        result.warnings.push_back("no treated unit was ever matched; estimate undefined");
    }
    return result;
}

// Every member of a group must agree exactly with the group signature.
inline bool exact_match_sound(const FeatureTable& features, const MatchedGroup& grp) {
    for (int u : grp.members)
        for (std::size_t a = 0; a < grp.active_columns.size(); ++a)
            if (features.columns[grp.active_columns[a]].values[static_cast<std::size_t>(u)] !=
                grp.signature[a])
                return false;
    return grp.treated_count >= 1 && grp.control_count >= 1;
}

}  // namespace netmatch
