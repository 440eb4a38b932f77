#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "netmatch/census.hpp"
#include "netmatch/flame.hpp"
#include "netmatch/graph.hpp"
#include "netmatch/interference.hpp"
#include "netmatch/sim.hpp"

namespace netmatch {

using json = nlohmann::ordered_json;

// Locale-independent floating point formatting (dot decimal separator).
inline std::string format_double(double v) {
    char buf[64];
    const int len = std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(strip(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline bool parse_int(const std::string& s, long long& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !s.empty();
}

// External ids sorted numerically when every id parses as an integer,
// lexicographically otherwise.
inline std::vector<std::string> sorted_ids(const std::set<std::string>& ids) {
    std::vector<std::string> out(ids.begin(), ids.end());
    bool all_numeric = !out.empty();
    for (const auto& id : out) {
        long long v;
        if (!parse_int(id, v)) {
            all_numeric = false;
            break;
        }
    }
    if (all_numeric)
        std::sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
            long long x = 0, y = 0;
            parse_int(a, x);
            parse_int(b, y);
            return x < y;
        });
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Edge lists and unit tables

struct EdgeList {
    Graph graph;
    std::vector<std::string> ids;  // external id of each vertex
    std::vector<std::string> warnings;
};

// CSV with header `src,dst`. Edges are symmetrized and deduplicated;
// self-loops are dropped with a warning. Vertices take the stable sorted-order
// mapping of the external ids.
inline EdgeList load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open edge list: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("edge list is empty: " + path);
    auto header = detail::split_csv_line(line);
    if (header.size() != 2 || header[0] != "src" || header[1] != "dst")
        throw InputError("edge list header must be `src,dst`: " + path);

    EdgeList out;
    std::set<std::string> id_set;
    std::vector<std::pair<std::string, std::string>> raw_edges;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::strip(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
            throw InputError("malformed edge list row at line " + std::to_string(line_no) +
                             " of " + path);
        if (fields[0] == fields[1]) {
            out.warnings.push_back("dropped self-loop at line " + std::to_string(line_no) + " (" +
                                   fields[0] + ")");
            id_set.insert(fields[0]);
            continue;
        }
        id_set.insert(fields[0]);
        id_set.insert(fields[1]);
        raw_edges.emplace_back(fields[0], fields[1]);
    }

    out.ids = detail::sorted_ids(id_set);
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < out.ids.size(); ++i) index[out.ids[i]] = static_cast<int>(i);
    std::vector<std::pair<int, int>> edges;
    for (const auto& [a, b] : raw_edges) edges.emplace_back(index[a], index[b]);
    out.graph = Graph(static_cast<int>(out.ids.size()), edges);
    return out;
}

inline void write_edge_list(const std::string& path, const Graph& g,
                            const std::vector<std::string>& ids) {
    std::ofstream outf(path);
    if (!outf) throw InputError("cannot write edge list: " + path);
    outf << "src,dst\n";
    for (const auto& [u, v] : g.edges())
        outf << ids[static_cast<std::size_t>(u)] << "," << ids[static_cast<std::size_t>(v)] << "\n";
}

struct UnitTable {
    std::vector<std::string> ids;
    std::vector<std::uint8_t> treated;
    std::vector<double> outcome;
    std::vector<std::string> covariate_names;
    std::vector<std::vector<std::string>> covariate_values;  // column-major
};

// CSV with header `id,treated,outcome[,covariate...]`.
inline UnitTable load_unit_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open unit table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("unit table is empty: " + path);
    auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "treated" || header[2] != "outcome")
        throw InputError("unit table header must start with `id,treated,outcome`: " + path);

    UnitTable out;
    for (std::size_t c = 3; c < header.size(); ++c) out.covariate_names.push_back(header[c]);
    out.covariate_values.resize(out.covariate_names.size());

    std::set<std::string> seen;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::strip(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw InputError("malformed unit table row at line " + std::to_string(line_no) +
                             " of " + path);
        if (!seen.insert(fields[0]).second)
            throw InputError("duplicate unit id `" + fields[0] + "` at line " +
                             std::to_string(line_no));
        long long tr;
        if (!detail::parse_int(fields[1], tr) || (tr != 0 && tr != 1))
            throw InputError("treated must be 0 or 1 at line " + std::to_string(line_no));
        char* end = nullptr;
        const double y = std::strtod(fields[2].c_str(), &end);
        if (end != fields[2].c_str() + fields[2].size() || fields[2].empty())
            throw InputError("bad outcome at line " + std::to_string(line_no));
        out.ids.push_back(fields[0]);
        out.treated.push_back(static_cast<std::uint8_t>(tr));
        out.outcome.push_back(y);
        for (std::size_t c = 0; c < out.covariate_names.size(); ++c)
            out.covariate_values[c].push_back(fields[3 + c]);
    }
    if (out.ids.empty()) throw InputError("unit table has no rows: " + path);
    return out;
}

// A graph, outcomes, treatments and covariates over a common unit index.
struct Dataset {
    Graph graph;
    std::vector<std::string> ids;
    TreatmentVector t;
    std::vector<double> y;
    std::vector<FeatureColumn> covariates;  // discrete codes per covariate
    std::vector<std::string> warnings;
};

// Align an edge list with a unit table: the unit table defines the vertex set
// (sorted-order mapping); every edge endpoint must be a known unit. Units with
// no edges become isolated vertices. Covariate strings are coded as dense
// categories in sorted value order.
inline Dataset align(const EdgeList& edges, const UnitTable& units) {
    Dataset out;
    out.warnings = edges.warnings;
    std::set<std::string> id_set(units.ids.begin(), units.ids.end());
    out.ids = detail::sorted_ids(id_set);
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < out.ids.size(); ++i) index[out.ids[i]] = static_cast<int>(i);

    std::vector<std::pair<int, int>> edge_pairs;
    for (const auto& [u, v] : edges.graph.edges()) {
        const auto& a = edges.ids[static_cast<std::size_t>(u)];
        const auto& b = edges.ids[static_cast<std::size_t>(v)];
        auto ia = index.find(a);
        auto ib = index.find(b);
        if (ia == index.end() || ib == index.end())
            throw InputError("edge endpoint `" + (ia == index.end() ? a : b) +
                             "` is not in the unit table");
        edge_pairs.emplace_back(ia->second, ib->second);
    }
    out.graph = Graph(static_cast<int>(out.ids.size()), edge_pairs);

    std::vector<std::uint8_t> t(out.ids.size(), 0);
    out.y.assign(out.ids.size(), 0.0);
    std::vector<std::vector<std::string>> cov(units.covariate_names.size(),
                                              std::vector<std::string>(out.ids.size()));
    for (std::size_t r = 0; r < units.ids.size(); ++r) {
        const auto i = static_cast<std::size_t>(index[units.ids[r]]);
        t[i] = units.treated[r];
        out.y[i] = units.outcome[r];
        for (std::size_t c = 0; c < cov.size(); ++c) cov[c][i] = units.covariate_values[c][r];
    }
    out.t = TreatmentVector(std::move(t));

    for (std::size_t c = 0; c < units.covariate_names.size(); ++c) {
        std::set<std::string> values(cov[c].begin(), cov[c].end());
        std::map<std::string, std::int64_t> code;
        std::int64_t next = 0;
        for (const auto& v : values) code[v] = next++;
        FeatureColumn col;
        col.name = units.covariate_names[c];
        col.kind = ColumnKind::Covariate;
        col.values.reserve(out.ids.size());
        for (const auto& v : cov[c]) col.values.push_back(code[v]);
        out.covariates.push_back(std::move(col));
    }
    return out;
}

// Drop units whose degree exceeds the cap and re-induce the graph over the
// survivors.
inline Dataset filter_max_degree(const Dataset& data, int cap) {
    if (cap < 1) throw InputError("filter_max_degree: cap must be >= 1");
    std::vector<int> keep;
    for (int i = 0; i < data.graph.vertex_count(); ++i)
        if (data.graph.degree(i) <= cap) keep.push_back(i);
    if (keep.empty()) throw InputError("filter_max_degree: all units removed");

    Dataset out;
    out.warnings = data.warnings;
    if (keep.size() != static_cast<std::size_t>(data.graph.vertex_count()))
        out.warnings.push_back("max-degree filter dropped " +
                               std::to_string(data.graph.vertex_count() - static_cast<int>(keep.size())) +
                               " unit(s)");
    std::vector<int> vertex_map;
    out.graph = induced_subgraph(data.graph, keep, &vertex_map);
    std::vector<std::uint8_t> t;
    for (int v : vertex_map) {
        out.ids.push_back(data.ids[static_cast<std::size_t>(v)]);
        t.push_back(data.t[v]);
        out.y.push_back(data.y[static_cast<std::size_t>(v)]);
    }
    out.t = TreatmentVector(std::move(t));
    for (const auto& col : data.covariates) {
        FeatureColumn c;
        c.name = col.name;
        c.kind = col.kind;
        for (int v : vertex_map) c.values.push_back(col.values[static_cast<std::size_t>(v)]);
        out.covariates.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report writers (fixed column order, dot decimal separator)

inline void write_id_map_csv(const std::string& path, const std::vector<std::string>& ids) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    out << "index,id\n";
    for (std::size_t i = 0; i < ids.size(); ++i) out << i << "," << ids[i] << "\n";
}

inline void write_census_csv(const std::string& path, const std::vector<std::string>& ids,
                             const CensusResult& census) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    out << "unit";
    for (const auto& code : census.universe) out << "," << code.column_name();
    out << "\n";
    const auto counts = to_count_matrix(census);
    for (std::size_t i = 0; i < census.per_unit.size(); ++i) {
        out << ids[i];
        for (std::size_t k = 0; k < census.universe.size(); ++k) out << "," << counts[i][k];
        out << "\n";
    }
}

inline void write_components_csv(const std::string& path, const std::vector<std::string>& ids,
                                 const ComponentMatrix& components) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    out << "unit";
    for (const auto& name : components.names) out << "," << name;
    out << "\n";
    for (std::size_t i = 0; i < components.n_units; ++i) {
        out << ids[i];
        for (const auto& col : components.columns) out << "," << format_double(col[i]);
        out << "\n";
    }
}

inline void write_drop_log_csv(const std::string& path, const MatchResult& result) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    out << "iteration,dropped_column,balancing_factor,pe_outcome,pe_network,match_quality\n";
    for (const auto& e : result.drop_log)
        out << e.iteration << "," << e.dropped_column << "," << format_double(e.balancing_factor)
            << "," << format_double(e.pe_outcome) << "," << format_double(e.pe_network) << ","
            << format_double(e.match_quality) << "\n";
}

inline void write_matched_groups_csv(const std::string& path, const MatchResult& result,
                                     const FeatureTable& features,
                                     const std::vector<std::string>& ids,
                                     std::span<const double> y, const TreatmentVector& t) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    out << "group,iteration,unit,treated,outcome";
    for (const auto& col : features.columns) out << "," << col.name;
    out << ",matched_on\n";
    for (std::size_t gidx = 0; gidx < result.groups.size(); ++gidx) {
        const auto& grp = result.groups[gidx];
        std::string matched_on;
        for (std::size_t a = 0; a < grp.active_columns.size(); ++a) {
            if (a) matched_on += ";";
            matched_on += features.columns[grp.active_columns[a]].name;
        }
        for (int u : grp.members) {
            out << gidx << "," << grp.iteration << "," << ids[static_cast<std::size_t>(u)] << ","
                << (t.treated(u) ? 1 : 0) << "," << format_double(y[static_cast<std::size_t>(u)]);
            for (const auto& col : features.columns)
                out << "," << col.values[static_cast<std::size_t>(u)];
            out << "," << matched_on << "\n";
        }
    }
}

// Minimal reader for matched-groups CSV: group id and unit id columns.
inline std::vector<std::vector<std::string>> read_group_members(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open matched groups: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("matched groups file is empty: " + path);
    auto header = detail::split_csv_line(line);
    std::size_t group_col = header.size(), unit_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "group") group_col = c;
        if (header[c] == "unit") unit_col = c;
    }
    if (group_col == header.size() || unit_col == header.size())
        throw InputError("matched groups file needs `group` and `unit` columns: " + path);
    std::map<long long, std::vector<std::string>> groups;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::strip(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw InputError("malformed matched groups row at line " + std::to_string(line_no));
        long long gid;
        if (!detail::parse_int(fields[group_col], gid))
            throw InputError("bad group id at line " + std::to_string(line_no));
        groups[gid].push_back(fields[unit_col]);
    }
    std::vector<std::vector<std::string>> out;
    for (auto& [gid, members] : groups) out.push_back(std::move(members));
    return out;
}

inline void write_replications_csv(const std::string& path,
                                   const std::vector<std::pair<std::string, ExperimentResult>>& runs,
                                   const std::string& preset) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    out << "preset,label,rep,seed,method,estimate,abs_error,true_ade,graph_distance,status\n";
    for (const auto& [label, result] : runs)
        for (const auto& rec : result.records)
            for (const auto& [m, mo] : rec.methods) {
                out << preset << "," << label << "," << rec.rep << "," << rec.seed << ","
                    << method_name(m) << ",";
                if (mo.ok) out << format_double(mo.estimate);
                out << ",";
                if (mo.ok) out << format_double(mo.abs_error);
                out << "," << format_double(rec.true_ade) << ",";
                if (!std::isnan(mo.graph_distance)) out << format_double(mo.graph_distance);
                out << "," << (mo.ok ? "ok" : "failed") << "\n";
            }
}

inline json summary_to_json(const ExperimentResult& result) {
    json methods = json::object();
    for (const auto& [m, s] : result.summaries) {
        json entry;
        entry["replications_ok"] = s.n_ok;
        entry["mean_abs_error"] = s.mean_abs_error;
        entry["median_abs_error"] = s.median_abs_error;
        entry["q25_abs_error"] = s.q25;
        entry["q75_abs_error"] = s.q75;
        if (!std::isnan(s.mean_graph_distance))
            entry["mean_graph_distance"] = s.mean_graph_distance;
        methods[method_name(m)] = entry;
    }
    return methods;
}

// ---------------------------------------------------------------------------
// SimConfig JSON (cli_io owns formats; the harness stays serialization-free)

inline json to_json(const SimConfig& c) {
    json j;
    if (const auto* er = std::get_if<ErModel>(&c.graph))
        j["graph"] = {{"model", "er"}, {"n", er->n}, {"q", er->q}};
    else if (const auto* sbm = std::get_if<SbmModel>(&c.graph))
        j["graph"] = {{"model", "sbm"},
                      {"block_sizes", sbm->block_sizes},
                      {"p_within", sbm->p_within},
                      {"p_between", sbm->p_between}};
    else {
        const auto& ext = std::get<ExternalGraphModel>(c.graph);
        json edges = json::array();
        for (const auto& [u, v] : ext.edges) edges.push_back({u, v});
        j["graph"] = {{"model", "external"}, {"n", ext.n}, {"edges", edges}};
    }

    if (const auto* complete = std::get_if<CompleteDesign>(&c.randomization))
        j["randomization"] = {{"design", "complete"}, {"n_treated", complete->n_treated}};
    else if (const auto* bern = std::get_if<BernoulliDesign>(&c.randomization))
        j["randomization"] = {{"design", "bernoulli"}, {"p", bern->p}};
    else {
        const auto& cl = std::get<ClusterDesign>(c.randomization);
        j["randomization"] = {{"design", "cluster"},
                              {"block_sizes", cl.block_sizes},
                              {"treated_per_block", cl.treated_per_block}};
    }

    if (std::holds_alternative<NoInterference>(c.interference))
        j["interference"] = {{"kind", "none"}};
    else if (const auto* add = std::get_if<AdditiveInterference>(&c.interference))
        j["interference"] = {{"kind", "additive"}, {"gamma", add->gamma}};
    else if (const auto* mult = std::get_if<MultiplicativeInterference>(&c.interference))
        j["interference"] = {{"kind", "multiplicative"},
                             {"components", mult->components},
                             {"alpha", mult->alpha},
                             {"zscore", mult->zscore}};
    else
        j["interference"] = {{"kind", "misspecified"},
                             {"gamma", std::get<MisspecifiedInterference>(c.interference).gamma}};

    if (c.covariate)
        j["covariate"] = {{"beta", c.covariate->beta}, {"levels", c.covariate->levels}};

    if (const auto* homo = std::get_if<HomoskedasticErrors>(&c.errors))
        j["errors"] = {{"kind", "homoskedastic"}, {"sigma", homo->sigma}};
    else
        j["errors"] = {{"kind", "heteroskedastic"}};

    j["tau_mean"] = c.tau_mean;
    j["tau_sd"] = c.tau_sd;
    j["replications"] = c.replications;
    j["seed"] = c.seed;
    j["fixed_graph"] = c.fixed_graph;
    j["score_against_fixed_tau"] = c.score_against_fixed_tau;
    j["census"] = {{"hops", c.census.hops},
                   {"include_ego", c.census.include_ego},
                   {"max_size", c.census.max_size}};
    j["bins"] = c.binarize.bins;
    j["match"] = {{"c", c.match.balance_weight},
                  {"d", c.match.network_weight},
                  {"ridge", c.match.ridge_lambda},
                  {"holdout", c.match.holdout_fraction},
                  {"pe_g_sign", c.match.pe_g_sign == PeGSign::RewardFit ? "reward-fit" : "literal"},
                  {"stop", c.match.stop == StopRule::AllTreatedMatched    ? "all-treated-matched"
                           : c.match.stop == StopRule::ExhaustCovariates ? "exhaust-covariates"
                                                                         : "mq-drop"},
                  {"mq_drop_fraction", c.match.mq_drop_fraction}};
    j["run_true_f"] = c.run_true_f;
    j["eval_match_quality"] = c.eval_match_quality;
    return j;
}

inline SimConfig sim_config_from_json(const json& j) {
    SimConfig c;
    {
        const auto& g = j.at("graph");
        const std::string model = g.at("model");
        if (model == "er")
            c.graph = ErModel{g.at("n").get<int>(), g.at("q").get<double>()};
        else if (model == "sbm")
            c.graph = SbmModel{g.at("block_sizes").get<std::vector<int>>(),
                               g.at("p_within").get<double>(), g.at("p_between").get<double>()};
        else if (model == "external") {
            ExternalGraphModel ext;
            ext.n = g.at("n").get<int>();
            for (const auto& e : g.at("edges"))
                ext.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
            c.graph = ext;
        } else
            throw InputError("config: unknown graph model `" + model + "`");
    }
    {
        const auto& r = j.at("randomization");
        const std::string design = r.at("design");
        if (design == "complete")
            c.randomization = CompleteDesign{r.at("n_treated").get<int>()};
        else if (design == "bernoulli")
            c.randomization = BernoulliDesign{r.at("p").get<double>()};
        else if (design == "cluster")
            c.randomization = ClusterDesign{r.at("block_sizes").get<std::vector<int>>(),
                                            r.at("treated_per_block").get<int>()};
        else
            throw InputError("config: unknown randomization `" + design + "`");
    }
    if (j.contains("interference")) {
        const auto& f = j.at("interference");
        const std::string kind = f.at("kind");
        if (kind == "none")
            c.interference = NoInterference{};
        else if (kind == "additive") {
            auto gamma = f.at("gamma").get<std::vector<double>>();
            if (gamma.size() != 7)
                throw InputError("config: additive gamma must have exactly 7 entries");
            AdditiveInterference add;
            std::copy(gamma.begin(), gamma.end(), add.gamma.begin());
            c.interference = add;
        } else if (kind == "multiplicative") {
            MultiplicativeInterference mult;
            mult.components = f.at("components").get<std::vector<std::string>>();
            mult.alpha = f.value("alpha", 1.0);
            mult.zscore = f.value("zscore", false);
            c.interference = mult;
        } else if (kind == "misspecified")
            c.interference = MisspecifiedInterference{f.at("gamma").get<double>()};
        else
            throw InputError("config: unknown interference kind `" + kind + "`");
    }
    if (j.contains("covariate")) {
        CovariateTerm cov;
        cov.beta = j.at("covariate").at("beta").get<double>();
        cov.levels = j.at("covariate").value("levels", std::vector<int>{1, 2, 3});
        c.covariate = cov;
    }
    if (j.contains("errors")) {
        const std::string kind = j.at("errors").at("kind");
        if (kind == "homoskedastic")
            c.errors = HomoskedasticErrors{j.at("errors").value("sigma", 1.0)};
        else if (kind == "heteroskedastic")
            c.errors = HeteroskedasticErrors{};
        else
            throw InputError("config: unknown error kind `" + kind + "`");
    }
    c.tau_mean = j.value("tau_mean", 5.0);
    c.tau_sd = j.value("tau_sd", 1.0);
    c.replications = j.value("replications", 1);
    c.seed = j.value("seed", std::uint64_t{0});
    c.fixed_graph = j.value("fixed_graph", false);
    c.score_against_fixed_tau = j.value("score_against_fixed_tau", false);
    if (j.contains("census")) {
        c.census.hops = j.at("census").value("hops", 1);
        c.census.include_ego = j.at("census").value("include_ego", false);
        c.census.max_size = j.at("census").value("max_size", kDefaultMotifSize);
    }
    c.binarize.bins = j.value("bins", 0);
    if (j.contains("match")) {
        const auto& m = j.at("match");
        c.match.balance_weight = m.value("c", 0.1);
        c.match.network_weight = m.value("d", 1.0);
        c.match.ridge_lambda = m.value("ridge", 0.1);
        c.match.holdout_fraction = m.value("holdout", 0.3);
        const std::string sign = m.value("pe_g_sign", "reward-fit");
        if (sign == "reward-fit")
            c.match.pe_g_sign = PeGSign::RewardFit;
        else if (sign == "literal")
            c.match.pe_g_sign = PeGSign::Literal;
        else
            throw InputError("config: unknown pe_g_sign `" + sign + "`");
        const std::string stop = m.value("stop", "mq-drop");
        if (stop == "all-treated-matched")
            c.match.stop = StopRule::AllTreatedMatched;
        else if (stop == "exhaust-covariates")
            c.match.stop = StopRule::ExhaustCovariates;
        else if (stop == "mq-drop")
            c.match.stop = StopRule::MqDrop;
        else
            throw InputError("config: unknown stop rule `" + stop + "`");
        c.match.mq_drop_fraction = m.value("mq_drop_fraction", 0.05);
    }
    c.run_true_f = j.value("run_true_f", false);
    c.eval_match_quality = j.value("eval_match_quality", false);
    return c;
}

}  // namespace netmatch
