#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "netmatch/baselines.hpp"
#include "netmatch/census.hpp"
#include "netmatch/flame.hpp"
#include "netmatch/graph.hpp"
#include "netmatch/interference.hpp"
#include "netmatch/parallel.hpp"

namespace netmatch {

// ---------------------------------------------------------------------------
// Configuration

struct ErModel {
    int n = 50;
    double q = 0.05;
};

struct SbmModel {
    std::vector<int> block_sizes;
    double p_within = 0.3;
    double p_between = 0.05;
};

struct ExternalGraphModel {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
};

using GraphModel = std::variant<ErModel, SbmModel, ExternalGraphModel>;

struct CompleteDesign {
    int n_treated = 0;
};

struct BernoulliDesign {
    double p = 0.5;
};

struct ClusterDesign {
    std::vector<int> block_sizes;
    int treated_per_block = 0;
};

using Randomization = std::variant<CompleteDesign, BernoulliDesign, ClusterDesign>;

struct NoInterference {};

struct AdditiveInterference {
    std::array<double, 7> gamma{};  // [d, triangles, 2-star, 4-star, dagger3, B, C]
};

struct MultiplicativeInterference {
    std::vector<std::string> components;
    double alpha = 1.0;
    bool zscore = false;
};

struct MisspecifiedInterference {
    double gamma = 0.0;  // f = (5 - gamma) d + gamma * triangles, on the edited graph
};

using Interference = std::variant<NoInterference, AdditiveInterference,
                                  MultiplicativeInterference, MisspecifiedInterference>;

struct CovariateTerm {
    double beta = 0.0;
    std::vector<int> levels{1, 2, 3};
};

struct HomoskedasticErrors {
    double sigma = 1.0;
};

struct HeteroskedasticErrors {};  // eps_i ~ N(0, v_i), v_i ~ U(0,1)

using ErrorModel = std::variant<HomoskedasticErrors, HeteroskedasticErrors>;

struct SimConfig {
    GraphModel graph = ErModel{};
    Randomization randomization = CompleteDesign{25};
    Interference interference = NoInterference{};
    std::optional<CovariateTerm> covariate;
    ErrorModel errors = HomoskedasticErrors{};
    double tau_mean = 5.0;
    double tau_sd = 1.0;
    int replications = 1;
    std::uint64_t seed = 0;
    bool fixed_graph = false;             // draw the graph once, reuse across replications
    bool score_against_fixed_tau = false; // score errors against tau_mean instead of realized mean
    CensusOptions census{};
    BinarizeOptions binarize{};
    MatchConfig match{};
    bool run_true_f = false;
    bool eval_match_quality = false;
};

// ---------------------------------------------------------------------------
// Generators

inline Graph gen_er(int n, double q, std::mt19937_64& rng) {
    if (n < 0 || q < 0.0 || q > 1.0) throw InputError("gen_er: invalid parameters");
    std::vector<std::pair<int, int>> edges;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (unif(rng) < q) edges.emplace_back(i, j);
    return Graph(n, edges);
}

inline Graph gen_sbm(const std::vector<int>& block_sizes, double p_within, double p_between,
                     std::mt19937_64& rng) {
    if (p_within < 0.0 || p_within > 1.0 || p_between < 0.0 || p_between > 1.0)
        throw InputError("gen_sbm: invalid probabilities");
    int n = 0;
    std::vector<int> block_of;
    for (std::size_t b = 0; b < block_sizes.size(); ++b) {
        if (block_sizes[b] <= 0) throw InputError("gen_sbm: block sizes must be positive");
        for (int k = 0; k < block_sizes[b]; ++k) block_of.push_back(static_cast<int>(b));
        n += block_sizes[b];
    }
    std::vector<std::pair<int, int>> edges;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double p = block_of[static_cast<std::size_t>(i)] ==
                                     block_of[static_cast<std::size_t>(j)]
                                 ? p_within
                                 : p_between;
            if (unif(rng) < p) edges.emplace_back(i, j);
        }
    return Graph(n, edges);
}

inline Graph draw_graph(const GraphModel& model, std::mt19937_64& rng) {
    if (const auto* er = std::get_if<ErModel>(&model)) return gen_er(er->n, er->q, rng);
    if (const auto* sbm = std::get_if<SbmModel>(&model))
        return gen_sbm(sbm->block_sizes, sbm->p_within, sbm->p_between, rng);
    const auto& ext = std::get<ExternalGraphModel>(model);
    return Graph(ext.n, ext.edges);
}

inline TreatmentVector randomize(int n, const Randomization& design, std::mt19937_64& rng) {
    std::vector<std::uint8_t> t(static_cast<std::size_t>(n), 0);
    if (const auto* complete = std::get_if<CompleteDesign>(&design)) {
        if (complete->n_treated < 0 || complete->n_treated > n)
            throw InputError("randomize: treated count exceeds n");
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < complete->n_treated; ++i) {
            const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
            t[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1;
        }
    } else if (const auto* bern = std::get_if<BernoulliDesign>(&design)) {
        if (bern->p < 0.0 || bern->p > 1.0) throw InputError("randomize: invalid p");
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = unif(rng) < bern->p ? 1 : 0;
    } else {
        const auto& cluster = std::get<ClusterDesign>(design);
        int offset = 0;
        for (int size : cluster.block_sizes) {
            if (cluster.treated_per_block < 0 || cluster.treated_per_block > size)
                throw InputError("randomize: treated per block exceeds block size");
            std::vector<int> idx(static_cast<std::size_t>(size));
            std::iota(idx.begin(), idx.end(), offset);
            for (int i = 0; i < cluster.treated_per_block; ++i) {
                const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(size - i));
                std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
                t[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1;
            }
            offset += size;
        }
        if (offset != n) throw InputError("randomize: cluster sizes do not sum to n");
    }
    return TreatmentVector(std::move(t));
}

// ---------------------------------------------------------------------------
// Outcome generation

struct OutcomeDraw {
    std::vector<double> y;
    std::vector<double> tau;
    std::vector<double> f;          // realized interference values
    std::vector<std::int64_t> x;    // covariate levels (empty when absent)
    double true_ade = 0.0;
};

namespace detail {

// Copy of the graph with every control-control edge removed.
inline Graph drop_control_control_edges(const Graph& g, const TreatmentVector& t) {
    std::vector<std::pair<int, int>> kept;
    for (const auto& [u, v] : g.edges())
        if (t.treated(u) || t.treated(v)) kept.emplace_back(u, v);
    return Graph(g.vertex_count(), kept);
}

}  // namespace detail

inline OutcomeDraw gen_outcomes(const SimConfig& config, const Graph& g, const TreatmentVector& t,
                                std::mt19937_64& rng) {
    require_compatible(g, t);
    const std::size_t n = t.size();
    OutcomeDraw out;
    out.tau.resize(n);
    out.f.assign(n, 0.0);
    out.y.assign(n, 0.0);

    std::normal_distribution<double> tau_dist(config.tau_mean, config.tau_sd);
    for (auto& v : out.tau) v = config.tau_sd > 0.0 ? tau_dist(rng) : config.tau_mean;

    if (std::holds_alternative<AdditiveInterference>(config.interference)) {
        const auto& add = std::get<AdditiveInterference>(config.interference);
        ComponentMatrix comps = zscore_normalize(interference_components(g, t));
        for (std::size_t p = 0; p < 7; ++p)
            for (std::size_t i = 0; i < n; ++i) out.f[i] += add.gamma[p] * comps.columns[p][i];
    } else if (std::holds_alternative<MultiplicativeInterference>(config.interference)) {
        const auto& mult = std::get<MultiplicativeInterference>(config.interference);
        ComponentMatrix comps = interference_components(g, t);
        if (mult.zscore) comps = zscore_normalize(comps);
        for (std::size_t i = 0; i < n; ++i) out.f[i] = mult.alpha;
        for (const auto& name : mult.components) {
            const auto& col = comps.column(name);
            for (std::size_t i = 0; i < n; ++i) out.f[i] *= col[i];
        }
    } else if (std::holds_alternative<MisspecifiedInterference>(config.interference)) {
        // Features are recounted after deleting control-control edges, so the
        // degree term counts all surviving neighbors: a treated unit keeps its
        // full degree while a control unit keeps only treated neighbors.
        const auto& mis = std::get<MisspecifiedInterference>(config.interference);
        Graph edited = detail::drop_control_control_edges(g, t);
        std::vector<double> deg(n, 0.0), tri(n, 0.0);
        parallel_for(n, [&](std::size_t i) {
            deg[i] = edited.degree(static_cast<int>(i));
            tri[i] = treated_triangles(edited, t, static_cast<int>(i));
        });
        const auto zdeg = zscore_column(deg);
        const auto ztri = zscore_column(tri);
        for (std::size_t i = 0; i < n; ++i)
            out.f[i] = (5.0 - mis.gamma) * zdeg[i] + mis.gamma * ztri[i];
    }

    if (config.covariate) {
        if (config.covariate->levels.empty())
            throw InputError("gen_outcomes: covariate level set is empty");
        out.x.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            out.x[i] = config.covariate->levels[rng() % config.covariate->levels.size()];
    }

    std::normal_distribution<double> std_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double eps;
        if (const auto* homo = std::get_if<HomoskedasticErrors>(&config.errors)) {
            eps = homo->sigma > 0.0 ? homo->sigma * std_normal(rng) : 0.0;
        } else {
            eps = std::sqrt(unif(rng)) * std_normal(rng);
        }
        out.y[i] = (t.treated(static_cast<int>(i)) ? out.tau[i] : 0.0) + out.f[i] + eps;
        if (config.covariate) out.y[i] += config.covariate->beta * static_cast<double>(out.x[i]);
    }

    double tau_sum = 0.0;
    for (double v : out.tau) tau_sum += v;
    out.true_ade = config.score_against_fixed_tau ? config.tau_mean
                                                  : tau_sum / static_cast<double>(n);
    return out;
}

// OLS residuals of y on the covariate's one-hot levels plus intercept, which
// reduces to centering within levels.
inline std::vector<double> ols_residualize(std::span<const double> y,
                                           std::span<const std::int64_t> x) {
    if (y.size() != x.size()) throw InputError("ols_residualize: length mismatch");
    std::map<std::int64_t, std::pair<double, int>> acc;
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto& [sum, cnt] = acc[x[i]];
        sum += y[i];
        ++cnt;
    }
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = y[i] - acc[x[i]].first / acc[x[i]].second;
    return out;
}

// ---------------------------------------------------------------------------
// Graph distance and match-quality evaluation

struct GraphDistanceOptions {
    int exact_max_size = 8;
};

namespace detail {

inline double adjacency_cost(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b,
                             const std::vector<int>& perm, int s) {
    int diff = 0;
    for (int u = 0; u < s; ++u)
        for (int v = u + 1; v < s; ++v)
            diff += a[static_cast<std::size_t>(u * s + v)] !=
                    b[static_cast<std::size_t>(perm[static_cast<std::size_t>(u)] * s +
                                               perm[static_cast<std::size_t>(v)])];
    return static_cast<double>(diff);
}

}  // namespace detail

// Minimal Frobenius norm of the adjacency difference over vertex reorderings,
// padding the smaller graph with isolated vertices. Exact (all permutations)
// up to exact_max_size vertices, degree-sorted greedy with pairwise-swap
// refinement above that; labels ride along but do not constrain the matching.
inline double graph_distance(const LabeledGraph& g1, const LabeledGraph& g2,
                             GraphDistanceOptions opts = {}) {
    const int s = std::max(g1.graph.vertex_count(), g2.graph.vertex_count());
    if (s == 0) return 0.0;
    auto padded = [&](const Graph& g) {
        std::vector<std::uint8_t> m(static_cast<std::size_t>(s) * static_cast<std::size_t>(s), 0);
        for (const auto& [u, v] : g.edges()) {
            m[static_cast<std::size_t>(u * s + v)] = 1;
            m[static_cast<std::size_t>(v * s + u)] = 1;
        }
        return m;
    };
    const auto a = padded(g1.graph);
    const auto b = padded(g2.graph);

    std::vector<int> perm(static_cast<std::size_t>(s));
    double best;
    if (s <= opts.exact_max_size) {
        std::iota(perm.begin(), perm.end(), 0);
        best = std::numeric_limits<double>::infinity();
        do {
            best = std::min(best, detail::adjacency_cost(a, b, perm, s));
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        auto degree_order = [&](const std::vector<std::uint8_t>& m) {
            std::vector<int> deg(static_cast<std::size_t>(s), 0);
            for (int u = 0; u < s; ++u)
                for (int v = 0; v < s; ++v) deg[static_cast<std::size_t>(u)] += m[static_cast<std::size_t>(u * s + v)];
            std::vector<int> order(static_cast<std::size_t>(s));
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
                return deg[static_cast<std::size_t>(x)] > deg[static_cast<std::size_t>(y)];
            });
            return order;
        };
        const auto oa = degree_order(a);
        const auto ob = degree_order(b);
        for (int r = 0; r < s; ++r)
            perm[static_cast<std::size_t>(oa[static_cast<std::size_t>(r)])] =
                ob[static_cast<std::size_t>(r)];
        best = detail::adjacency_cost(a, b, perm, s);
        bool improved = true;
        while (improved) {
            improved = false;
            for (int u = 0; u < s; ++u)
                for (int v = u + 1; v < s; ++v) {
                    std::swap(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
                    const double c = detail::adjacency_cost(a, b, perm, s);
                    if (c < best) {
                        best = c;
                        improved = true;
                    } else {
                        std::swap(perm[static_cast<std::size_t>(u)],
                                  perm[static_cast<std::size_t>(v)]);
                    }
                }
        }
    }
    return std::sqrt(2.0 * best);
}

// Mean over matched units of the minimal graph distance to an opposite-arm
// member of the unit's group.
inline double match_quality_eval(const std::vector<MatchedGroup>& groups, const Graph& g,
                                 const TreatmentVector& t, int hops = 1,
                                 GraphDistanceOptions opts = {}) {
    if (groups.empty()) throw InputError("match_quality_eval: no matches");
    std::map<int, LabeledGraph> cache;
    auto neighborhood = [&](int u) -> const LabeledGraph& {
        auto it = cache.find(u);
        if (it == cache.end())
            it = cache.emplace(u, labeled_neighborhood(g, t, u, {hops, false})).first;
        return it->second;
    };
    double total = 0.0;
    int count = 0;
    for (const auto& grp : groups) {
        for (int u : grp.members) {
            double best = std::numeric_limits<double>::infinity();
            for (int v : grp.members) {
                if (t[u] == t[v]) continue;
                best = std::min(best, graph_distance(neighborhood(u), neighborhood(v), opts));
            }
            total += best;
            ++count;
        }
    }
    return total / count;
}

// Pairing form used for the nearest-neighbor style estimators.
inline double match_quality_eval(const std::vector<std::pair<int, int>>& pairs, const Graph& g,
                                 const TreatmentVector& t, int hops = 1,
                                 GraphDistanceOptions opts = {}) {
    if (pairs.empty()) throw InputError("match_quality_eval: no matches");
    std::map<int, LabeledGraph> cache;
    auto neighborhood = [&](int u) -> const LabeledGraph& {
        auto it = cache.find(u);
        if (it == cache.end())
            it = cache.emplace(u, labeled_neighborhood(g, t, u, {hops, false})).first;
        return it->second;
    };
    double total = 0.0;
    for (const auto& [a, b] : pairs) total += graph_distance(neighborhood(a), neighborhood(b), opts);
    return total / static_cast<double>(pairs.size());
}

// Match each treated unit to the control(s) nearest in true interference value
// and average the outcome differences; ties are averaged over the argmin set.
inline double match_on_true_f(std::span<const double> f, std::span<const double> y,
                              const TreatmentVector& t,
                              std::vector<std::pair<int, int>>* pairing = nullptr) {
    if (f.size() != t.size() || y.size() != t.size())
        throw InputError("match_on_true_f: length mismatch");
    std::vector<int> treated, control;
    for (std::size_t i = 0; i < t.size(); ++i)
        (t[static_cast<int>(i)] ? treated : control).push_back(static_cast<int>(i));
    if (treated.empty() || control.empty())
        throw EstimationError("match_on_true_f: an arm is empty");

    double total = 0.0;
    for (int i : treated) {
        double best = std::numeric_limits<double>::infinity();
        for (int j : control)
            best = std::min(best, std::abs(f[static_cast<std::size_t>(i)] -
                                           f[static_cast<std::size_t>(j)]));
        double sum = 0.0;
        int cnt = 0;
        int first = -1;
        for (int j : control)
            if (std::abs(f[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(j)]) == best) {
                sum += y[static_cast<std::size_t>(j)];
                ++cnt;
                if (first < 0) first = j;
            }
        total += y[static_cast<std::size_t>(i)] - sum / cnt;
        if (pairing) pairing->emplace_back(i, first);
    }
    return total / static_cast<double>(treated.size());
}

// ---------------------------------------------------------------------------
// Experiment runner

enum class Method { Flame, Naive, EigenFirst, EigenAll, Stratified, Sania, TrueF };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::Flame: return "flame";
        case Method::Naive: return "naive";
        case Method::EigenFirst: return "eigen1";
        case Method::EigenAll: return "eigenall";
        case Method::Stratified: return "stratified";
        case Method::Sania: return "sania";
        case Method::TrueF: return "truef";
    }
    return "?";
}

struct MethodOutcome {
    bool ok = false;
    double estimate = std::numeric_limits<double>::quiet_NaN();
    double abs_error = std::numeric_limits<double>::quiet_NaN();
    double graph_distance = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

struct ReplicationRecord {
    int rep = 0;
    std::uint64_t seed = 0;
    double true_ade = 0.0;
    std::vector<std::pair<Method, MethodOutcome>> methods;
};

struct MethodSummary {
    int n_ok = 0;
    double mean_abs_error = std::numeric_limits<double>::quiet_NaN();
    double median_abs_error = std::numeric_limits<double>::quiet_NaN();
    double q25 = std::numeric_limits<double>::quiet_NaN();
    double q75 = std::numeric_limits<double>::quiet_NaN();
    double mean_graph_distance = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
    std::vector<ReplicationRecord> records;
    std::vector<std::pair<Method, MethodSummary>> summaries;
};

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double plug_in_treatment_probability(const Randomization& design, const TreatmentVector& t) {
    if (const auto* bern = std::get_if<BernoulliDesign>(&design)) return bern->p;
    // Complete and cluster designs: natural plug-in from the realized counts.
    (void)t;
    if (const auto* complete = std::get_if<CompleteDesign>(&design))
        return static_cast<double>(complete->n_treated) / static_cast<double>(t.size());
    const auto& cluster = std::get<ClusterDesign>(design);
    int n = 0;
    for (int s : cluster.block_sizes) n += s;
    return static_cast<double>(cluster.treated_per_block) *
           static_cast<double>(cluster.block_sizes.size()) / static_cast<double>(n);
}

inline ExperimentResult run_experiment(const SimConfig& config) {
    if (config.replications < 1) throw InputError("run_experiment: replications must be >= 1");

    std::optional<Graph> shared_graph;
    if (config.fixed_graph) {
        std::mt19937_64 graph_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
        shared_graph = draw_graph(config.graph, graph_rng);
    }

    std::vector<Method> methods{Method::Flame,      Method::Naive, Method::EigenFirst,
                                Method::EigenAll,   Method::Stratified, Method::Sania};
    if (config.run_true_f || config.eval_match_quality) methods.push_back(Method::TrueF);

    ExperimentResult result;
    result.records.resize(static_cast<std::size_t>(config.replications));

    parallel_for(static_cast<std::size_t>(config.replications), [&](std::size_t r) {
        ReplicationRecord& rec = result.records[r];
        rec.rep = static_cast<int>(r);
        rec.seed = config.seed + r;
        std::mt19937_64 rng(rec.seed);

        Graph g = shared_graph ? *shared_graph : draw_graph(config.graph, rng);
        TreatmentVector t = randomize(g.vertex_count(), config.randomization, rng);
        OutcomeDraw draw = gen_outcomes(config, g, t, rng);
        rec.true_ade = draw.true_ade;

        // Baselines consume residualized outcomes when a covariate is present.
        std::vector<double> yb = draw.x.empty() ? draw.y : ols_residualize(draw.y, draw.x);

        auto run = [&](Method m, auto&& fn) {
            MethodOutcome out;
            try {
                double est = fn(out);
                out.estimate = est;
                out.abs_error = std::abs(est - rec.true_ade);
                out.ok = true;
            } catch (const std::exception& e) {
                out.note = e.what();
            }
            rec.methods.emplace_back(m, std::move(out));
        };

        CensusResult census = census_all_units(g, t, config.census);
        auto counts = to_count_matrix(census);
        std::vector<FeatureColumn> covs;
        if (!draw.x.empty()) covs.push_back(FeatureColumn{"x", ColumnKind::Covariate, draw.x});
        FeatureTable features = binarize(census, config.binarize, covs);

        EigenSpectrum spectrum = sym_eigen(adjacency_matrix(g));

        for (Method m : methods) {
            switch (m) {
                case Method::Flame:
                    run(m, [&](MethodOutcome& out) {
                        MatchConfig mc = config.match;
                        mc.seed = rec.seed;
                        MatchResult res = run_flame(features, draw.y, t, g, counts, mc);
                        if (!res.ade_defined)
                            throw EstimationError("flame: no matched groups");
                        if (config.eval_match_quality)
                            out.graph_distance = match_quality_eval(res.groups, g, t,
                                                                    config.census.hops);
                        return res.ade;
                    });
                    break;
                case Method::Naive:
                    run(m, [&](MethodOutcome&) { return naive_dim(yb, t); });
                    break;
                case Method::EigenFirst:
                    run(m, [&](MethodOutcome&) {
                        EigenMatchOptions opts;
                        opts.mode = EigenMatchMode::FirstVector;
                        return eigen_match(spectrum, yb, t, opts);
                    });
                    break;
                case Method::EigenAll:
                    run(m, [&](MethodOutcome& out) {
                        EigenMatchOptions opts;
                        opts.mode = EigenMatchMode::AllVectors;
                        std::vector<std::pair<int, int>> pairing;
                        if (config.eval_match_quality) opts.pairing = &pairing;
                        const double est = eigen_match(spectrum, yb, t, opts);
                        if (config.eval_match_quality)
                            out.graph_distance =
                                match_quality_eval(pairing, g, t, config.census.hops);
                        return est;
                    });
                    break;
                case Method::Stratified:
                    run(m, [&](MethodOutcome&) { return stratified_naive(g, yb, t); });
                    break;
                case Method::Sania:
                    run(m, [&](MethodOutcome&) {
                        std::vector<int> degrees(static_cast<std::size_t>(g.vertex_count()));
                        for (int i = 0; i < g.vertex_count(); ++i)
                            degrees[static_cast<std::size_t>(i)] = g.degree(i);
                        const double p = plug_in_treatment_probability(config.randomization, t);
                        return sania_estimate(sania_weights(degrees, t, p), yb);
                    });
                    break;
                case Method::TrueF:
                    run(m, [&](MethodOutcome& out) {
                        std::vector<std::pair<int, int>> pairing;
                        const double est = match_on_true_f(draw.f, yb, t,
                                                           config.eval_match_quality ? &pairing
                                                                                     : nullptr);
                        if (config.eval_match_quality)
                            out.graph_distance =
                                match_quality_eval(pairing, g, t, config.census.hops);
                        return est;
                    });
                    break;
            }
        }
    });

    for (Method m : methods) {
        MethodSummary s;
        std::vector<double> errs;
        double err_sum = 0.0, dist_sum = 0.0;
        int dist_n = 0;
        for (const auto& rec : result.records)
            for (const auto& [mm, out] : rec.methods) {
                if (mm != m || !out.ok) continue;
                errs.push_back(out.abs_error);
                err_sum += out.abs_error;
                if (!std::isnan(out.graph_distance)) {
                    dist_sum += out.graph_distance;
                    ++dist_n;
                }
            }
        s.n_ok = static_cast<int>(errs.size());
        if (!errs.empty()) {
            std::sort(errs.begin(), errs.end());
            s.mean_abs_error = err_sum / static_cast<double>(errs.size());
            s.median_abs_error = quantile_sorted(errs, 0.5);
            s.q25 = quantile_sorted(errs, 0.25);
            s.q75 = quantile_sorted(errs, 0.75);
        }
        if (dist_n > 0) s.mean_graph_distance = dist_sum / dist_n;
        result.summaries.emplace_back(m, s);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Independent-neighborhoods matching error (nearest-census matching across
// disjoint candidate graphs; the bias term shrinks as candidates multiply).

struct IndependentNeighborhoodsOptions {
    int candidates = 10;  // number of candidate graphs
    int graph_size = 8;
    double edge_prob = 0.25;
    int treated_per_graph = 4;
    double sigma = 0.1;
    double tau_mean = 5.0;
    int replications = 200;
    std::uint64_t seed = 0;
    int max_motif = 4;
};

namespace detail {

inline double splitmix_unit(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x = x ^ (x >> 31);
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

inline double code_weight(const CanonicalCode& code) {
    return 0.5 + 2.0 * splitmix_unit(code.bits ^ (static_cast<std::uint64_t>(code.size) << 56));
}

inline double census_f(const CensusVector& census) {
    double f = 0.0;
    for (const auto& [code, count] : census)
        f += code_weight(code) * static_cast<double>(count);
    return f;
}

inline double weighted_hamming(const CensusVector& a, const CensusVector& b) {
    double d = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            d += code_weight(ia->first);
            ++ia;
        } else if (ia == a.end() || ib->first < ia->first) {
            d += code_weight(ib->first);
            ++ib;
        } else {
            if (ia->second != ib->second) d += code_weight(ia->first);
            ++ia;
            ++ib;
        }
    }
    return d;
}

}  // namespace detail

inline double independent_neighborhoods_mean_error(const IndependentNeighborhoodsOptions& opts) {
    std::vector<double> errors(static_cast<std::size_t>(opts.replications), 0.0);
    parallel_for(static_cast<std::size_t>(opts.replications), [&](std::size_t r) {
        std::mt19937_64 rng(opts.seed + r);
        std::normal_distribution<double> noise(0.0, opts.sigma);
        std::normal_distribution<double> tau_dist(opts.tau_mean, 1.0);

        auto unit_census = [&](const Graph& g, const TreatmentVector& t) {
            LabeledGraph nb = labeled_neighborhood(g, t, 0, {1, false});
            return enumerate_connected_subgraphs(nb, opts.max_motif);
        };

        // Target: unit 0 of its own graph, treated by construction.
        Graph target_graph = gen_er(opts.graph_size, opts.edge_prob, rng);
        std::vector<std::uint8_t> tt(static_cast<std::size_t>(opts.graph_size), 0);
        tt[0] = 1;
        {
            std::vector<int> rest(static_cast<std::size_t>(opts.graph_size - 1));
            std::iota(rest.begin(), rest.end(), 1);
            for (int i = 0; i < opts.treated_per_graph - 1; ++i) {
                const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                                              opts.graph_size - 1 - i));
                std::swap(rest[static_cast<std::size_t>(i)], rest[static_cast<std::size_t>(j)]);
                tt[static_cast<std::size_t>(rest[static_cast<std::size_t>(i)])] = 1;
            }
        }
        TreatmentVector target_t(std::move(tt));
        CensusVector target_census = unit_census(target_graph, target_t);
        const double tau = tau_dist(rng);
        const double y_target = tau + detail::census_f(target_census) + noise(rng);

        double best_dist = std::numeric_limits<double>::infinity();
        double best_f = 0.0;
        bool found = false;
        while (!found) {
            for (int c = 0; c < opts.candidates; ++c) {
                Graph g = gen_er(opts.graph_size, opts.edge_prob, rng);
                TreatmentVector t =
                    randomize(opts.graph_size, CompleteDesign{opts.treated_per_graph}, rng);
                if (t.treated(0)) continue;  // only control candidates are eligible
                CensusVector census = unit_census(g, t);
                const double d = detail::weighted_hamming(target_census, census);
                if (d < best_dist) {
                    best_dist = d;
                    best_f = detail::census_f(census);
                }
                found = true;
            }
        }
        const double y_match = best_f + noise(rng);
        errors[r] = std::abs(y_target - y_match - tau);
    });
    double total = 0.0;
    for (double e : errors) total += e;
    return total / static_cast<double>(errors.size());
}

// ---------------------------------------------------------------------------
// Presets

struct PresetRun {
    std::string label;  // sweep label, empty for single-run presets
    SimConfig config;
};

inline std::vector<std::string> preset_names() {
    return {"exp1-s1", "exp1-s2", "exp1-s3", "exp1-s4", "exp2-b5", "exp2-b20", "exp2-b25",
            "exp3",    "mult-s1", "mult-s2", "mult-s3", "mult-s4", "sbm",     "hetero",
            "true-f",  "matchqual"};
}

inline std::vector<PresetRun> preset_runs(const std::string& name) {
    const std::array<std::array<double, 7>, 4> exp1_gamma{{{0, 10, 0, 0, 0, 0, 0},
                                                           {10, 10, 0, 0, 0, 0, 0},
                                                           {0, 10, 1, 1, 1, 1, -1},
                                                           {5, 1, 10, 1, 1, 1, -1}}};
    const std::array<double, 7> exp2_gamma{1, 1, 0, 0, 0, 1, 0};

    auto base_er50 = [] {
        SimConfig c;
        c.graph = ErModel{50, 0.05};
        c.randomization = CompleteDesign{25};
        c.replications = 50;
        return c;
    };

    if (name.rfind("exp1-s", 0) == 0 && name.size() == 7) {
        const int s = name[6] - '1';
        if (s >= 0 && s < 4) {
            SimConfig c = base_er50();
            c.interference = AdditiveInterference{exp1_gamma[static_cast<std::size_t>(s)]};
            return {{"", c}};
        }
    }
    if (name.rfind("exp2-b", 0) == 0) {
        const std::string betas = name.substr(6);
        if (betas == "5" || betas == "20" || betas == "25") {
            SimConfig c = base_er50();
            c.interference = AdditiveInterference{exp2_gamma};
            c.covariate = CovariateTerm{std::stod(betas), {1, 2, 3}};
            c.replications = betas == "5" ? 40 : 10;
            return {{"", c}};
        }
    }
    if (name == "exp3") {
        std::vector<PresetRun> runs;
        for (double gamma : {0.0, 2.5, 5.0}) {
            SimConfig c;
            c.graph = ErModel{75, 0.07};
            c.randomization = CompleteDesign{37};
            c.fixed_graph = true;
            c.interference = MisspecifiedInterference{gamma};
            c.replications = 50;
            std::string label = "gamma=" + std::to_string(gamma).substr(0, gamma == 2.5 ? 3 : 1);
            runs.push_back({label, c});
        }
        return runs;
    }
    if (name.rfind("mult-s", 0) == 0 && name.size() == 7) {
        const int s = name[6] - '1';
        static const std::vector<std::vector<std::string>> sets{
            {"treated_degree", "treated_triangles"},
            {"treated_degree", "betweenness"},
            {"treated_triangles", "betweenness"},
            {"treated_triangles", "treated_4star"}};
        if (s >= 0 && s < 4) {
            SimConfig c = base_er50();
            c.interference = MultiplicativeInterference{sets[static_cast<std::size_t>(s)], 1.0, false};
            return {{"", c}};
        }
    }
    if (name == "sbm") {
        SimConfig c;
        c.graph = SbmModel{{10, 10, 10, 10, 10}, 0.3, 0.05};
        c.randomization = ClusterDesign{{10, 10, 10, 10, 10}, 5};
        c.interference = AdditiveInterference{exp1_gamma[0]};
        c.replications = 50;
        return {{"", c}};
    }
    if (name == "hetero") {
        SimConfig c;
        c.graph = ErModel{50, 0.07};
        c.randomization = CompleteDesign{25};
        c.fixed_graph = true;
        c.interference = AdditiveInterference{exp1_gamma[0]};
        c.errors = HeteroskedasticErrors{};
        c.replications = 50;
        return {{"", c}};
    }
    if (name == "true-f") {
        SimConfig c;
        c.graph = ErModel{50, 0.07};
        c.randomization = CompleteDesign{25};
        c.fixed_graph = true;
        c.interference = AdditiveInterference{exp1_gamma[0]};
        c.run_true_f = true;
        c.replications = 50;
        return {{"", c}};
    }
    if (name == "matchqual") {
        SimConfig c;
        c.graph = ErModel{50, 0.07};
        c.randomization = CompleteDesign{25};
        c.fixed_graph = true;
        c.interference = AdditiveInterference{exp1_gamma[0]};
        c.run_true_f = true;
        c.eval_match_quality = true;
        c.replications = 50;
        return {{"", c}};
    }
    throw InputError("unknown preset: " + name);
}

}  // namespace netmatch
