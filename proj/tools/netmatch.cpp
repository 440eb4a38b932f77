// netmatch: direct-effect estimation on networks by almost-exact matching on
// neighborhood subgraph censuses, with baseline estimators and a simulation
// harness.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netmatch/baselines.hpp"
#include "netmatch/census.hpp"
#include "netmatch/flame.hpp"
#include "netmatch/interference.hpp"
#include "netmatch/io.hpp"
#include "netmatch/sim.hpp"

namespace fs = std::filesystem;
using namespace netmatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitInternal = 4;

struct CommonDataArgs {
    std::string edges_path;
    std::string units_path;
    int max_degree = 0;  // 0 = no filter
    int hops = 1;
    int motif_size = kDefaultMotifSize;
    int bins = 0;
};

void add_data_options(CLI::App* cmd, CommonDataArgs& args, bool with_census_opts = true) {
    cmd->add_option("--edges", args.edges_path, "Edge list CSV (header src,dst)")->required();
    cmd->add_option("--units", args.units_path, "Unit table CSV (header id,treated,outcome,...)")
        ->required();
    cmd->add_option("--max-degree", args.max_degree,
                    "Drop units with degree above this cap before analysis (0 = keep all)");
    if (with_census_opts) {
        cmd->add_option("--hops", args.hops, "Neighborhood radius in hops (default 1)");
        cmd->add_option("--motif-size", args.motif_size, "Largest motif size counted (default 5)");
        cmd->add_option("--bins", args.bins,
                        "Quantile bins for census counts (0 = match on exact counts)");
    }
}

Dataset load_dataset(const CommonDataArgs& args) {
    EdgeList edges = load_edge_list(args.edges_path);
    UnitTable units = load_unit_table(args.units_path);
    Dataset data = align(edges, units);
    if (args.max_degree > 0) data = filter_max_degree(data, args.max_degree);
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";
    return data;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path.string());
    out << text;
}

json baseline_estimates(const Dataset& data) {
    json out = json::object();
    auto record = [&](const char* name, auto&& fn) {
        json entry;
        try {
            entry["estimate"] = fn();
            entry["ok"] = true;
        } catch (const std::exception& e) {
            entry["ok"] = false;
            entry["error"] = e.what();
        }
        out[name] = entry;
    };
    EigenSpectrum spectrum = sym_eigen(adjacency_matrix(data.graph));
    record("naive", [&] { return naive_dim(data.y, data.t); });
    record("eigen1", [&] {
        EigenMatchOptions opts;
        opts.mode = EigenMatchMode::FirstVector;
        return eigen_match(spectrum, data.y, data.t, opts);
    });
    record("eigenall", [&] {
        EigenMatchOptions opts;
        opts.mode = EigenMatchMode::AllVectors;
        return eigen_match(spectrum, data.y, data.t, opts);
    });
    record("stratified", [&] { return stratified_naive(data.graph, data.y, data.t); });
    record("sania", [&] {
        std::vector<int> degrees(static_cast<std::size_t>(data.graph.vertex_count()));
        for (int i = 0; i < data.graph.vertex_count(); ++i)
            degrees[static_cast<std::size_t>(i)] = data.graph.degree(i);
        const double p = static_cast<double>(data.t.count_treated()) /
                         static_cast<double>(data.t.size());
        return sania_estimate(sania_weights(degrees, data.t, p), data.y);
    });
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netmatch: direct-effect estimation on networks"};
    app.require_subcommand(1);

    // --- census ---
    auto* census_cmd = app.add_subcommand("census", "Export neighborhood subgraph censuses and "
                                                    "interference components");
    CommonDataArgs census_args;
    std::string census_out = ".";
    bool census_include_ego = false;
    add_data_options(census_cmd, census_args);
    census_cmd->add_option("--out-dir", census_out, "Output directory");
    census_cmd->add_flag("--include-ego", census_include_ego,
                         "Include the ego vertex in neighborhood graphs");

    // --- estimate ---
    auto* est_cmd = app.add_subcommand("estimate", "Estimate the ADE by FLAME matching on "
                                                   "subgraph censuses");
    CommonDataArgs est_args;
    std::string est_out = ".";
    std::string est_baselines = "none";
    std::string est_pe_g_sign = "reward-fit";
    std::string est_stop = "mq-drop";
    std::string est_holdout_ids;
    MatchConfig est_match;
    est_cmd->add_option("--out-dir", est_out, "Output directory");
    add_data_options(est_cmd, est_args);
    est_cmd->add_option("--c", est_match.balance_weight, "Balancing factor weight (default 0.1)");
    est_cmd->add_option("--d", est_match.network_weight, "Network fit weight (default 1)");
    est_cmd->add_option("--ridge", est_match.ridge_lambda, "Ridge penalty (default 0.1)");
    est_cmd->add_option("--holdout", est_match.holdout_fraction,
                        "Holdout fraction in (0,1) (default 0.3)");
    est_cmd->add_option("--holdout-ids", est_holdout_ids,
                        "Comma-separated unit ids to hold out (overrides --holdout)");
    est_cmd->add_option("--seed", est_match.seed, "Seed for the holdout split");
    est_cmd->add_option("--baselines", est_baselines, "Also run baselines: all|none");
    est_cmd->add_option("--pe-g-sign", est_pe_g_sign, "Network term sign: reward-fit|literal");
    est_cmd->add_option("--stop", est_stop,
                        "Stop rule: mq-drop|all-treated-matched|exhaust-covariates");
    est_cmd->add_option("--mq-drop", est_match.mq_drop_fraction,
                        "Tolerated relative MQ degradation before stopping (default 0.05)");

    // --- simulate ---
    auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation preset or config");
    std::string sim_preset, sim_config_path, sim_out = ".";
    int sim_reps = 0;
    std::optional<std::uint64_t> sim_seed;
    sim_cmd->add_option("--preset", sim_preset, "Preset name (see --help-presets)");
    sim_cmd->add_option("--config", sim_config_path, "SimConfig JSON path");
    sim_cmd->add_option("--reps", sim_reps, "Override replication count");
    sim_cmd->add_option("--seed", [&sim_seed](const std::vector<std::string>& v) {
        sim_seed = std::stoull(v[0]);
        return true;
    }, "Override seed");
    sim_cmd->add_option("--out-dir", sim_out, "Output directory");

    // --- baselines ---
    auto* base_cmd = app.add_subcommand("baselines", "Run only the baseline estimators");
    CommonDataArgs base_args;
    std::string base_out = ".";
    add_data_options(base_cmd, base_args, false);
    base_cmd->add_option("--out-dir", base_out, "Output directory");

    // --- evaluate-matches ---
    auto* eval_cmd = app.add_subcommand("evaluate-matches",
                                        "Mean neighborhood graph distance of matched groups");
    CommonDataArgs eval_args;
    std::string eval_groups, eval_out = ".";
    add_data_options(eval_cmd, eval_args);
    eval_cmd->add_option("--groups", eval_groups, "matched_groups.csv from `estimate`")->required();
    eval_cmd->add_option("--out-dir", eval_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*census_cmd) {
            Dataset data = load_dataset(census_args);
            CensusOptions opts{census_args.hops, census_include_ego, census_args.motif_size};
            CensusResult census = census_all_units(data.graph, data.t, opts);
            ComponentMatrix components = interference_components(data.graph, data.t);
            fs::create_directories(census_out);
            write_census_csv((fs::path(census_out) / "census.csv").string(), data.ids, census);
            write_components_csv((fs::path(census_out) / "components.csv").string(), data.ids,
                                 components);
            write_id_map_csv((fs::path(census_out) / "id_map.csv").string(), data.ids);
            std::cout << "census: " << data.ids.size() << " units, " << census.universe.size()
                      << " distinct subgraphs\n";
            return kExitOk;
        }

        if (*est_cmd) {
            Dataset data = load_dataset(est_args);
            CensusOptions census_opts{est_args.hops, false, est_args.motif_size};
            CensusResult census = census_all_units(data.graph, data.t, census_opts);
            auto counts = to_count_matrix(census);
            FeatureTable features =
                binarize(census, BinarizeOptions{est_args.bins}, data.covariates);

            if (est_pe_g_sign == "literal")
                est_match.pe_g_sign = PeGSign::Literal;
            else if (est_pe_g_sign != "reward-fit")
                throw InputError("--pe-g-sign must be reward-fit or literal");
            if (est_stop == "exhaust-covariates")
                est_match.stop = StopRule::ExhaustCovariates;
            else if (est_stop == "mq-drop")
                est_match.stop = StopRule::MqDrop;
            else if (est_stop != "all-treated-matched")
                throw InputError("--stop must be all-treated-matched|exhaust-covariates|mq-drop");
            if (!est_holdout_ids.empty()) {
                std::map<std::string, int> index;
                for (std::size_t i = 0; i < data.ids.size(); ++i)
                    index[data.ids[i]] = static_cast<int>(i);
                std::stringstream ss(est_holdout_ids);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    auto it = index.find(tok);
                    if (it == index.end())
                        throw InputError("--holdout-ids: unknown unit id `" + tok + "`");
                    est_match.holdout_ids.push_back(it->second);
                }
            }

            MatchResult result = run_flame(features, data.y, data.t, data.graph, counts, est_match);
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

            fs::create_directories(est_out);
            write_drop_log_csv((fs::path(est_out) / "drop_log.csv").string(), result);
            write_matched_groups_csv((fs::path(est_out) / "matched_groups.csv").string(), result,
                                     features, data.ids, data.y, data.t);
            write_id_map_csv((fs::path(est_out) / "id_map.csv").string(), data.ids);

            json report;
            json flame;
            flame["ok"] = result.ade_defined;
            if (result.ade_defined) flame["estimate"] = result.ade;
            flame["groups"] = result.groups.size();
            std::size_t matched = 0;
            for (const auto& grp : result.groups) matched += grp.members.size();
            flame["matched_units"] = matched;
            flame["unmatched_units"] = result.unmatched.size();
            flame["holdout_units"] = result.holdout.size();
            flame["iterations"] = result.drop_log.size();
            report["flame"] = flame;
            if (est_baselines == "all") {
                json base = baseline_estimates(data);
                for (auto& [key, value] : base.items()) report[key] = value;
            } else if (est_baselines != "none") {
                throw InputError("--baselines must be all or none");
            }
            write_text(fs::path(est_out) / "estimates.json", report.dump(2) + "\n");

            if (!result.ade_defined) {
                std::cerr << "estimate: no matched groups; ADE undefined\n";
                return kExitEstimation;
            }
            std::cout << "flame ADE: " << format_double(result.ade) << " (" << result.groups.size()
                      << " groups)\n";
            return kExitOk;
        }

        if (*sim_cmd) {
            std::vector<PresetRun> runs;
            std::string tag;
            if (!sim_preset.empty() && !sim_config_path.empty())
                throw InputError("simulate: use --preset or --config, not both");
            if (!sim_preset.empty()) {
                try {
                    runs = preset_runs(sim_preset);
                } catch (const InputError&) {
                    std::string names;
                    for (const auto& n : preset_names()) names += " " + n;
                    throw InputError("unknown preset `" + sim_preset + "`; available:" + names);
                }
                tag = sim_preset;
            } else if (!sim_config_path.empty()) {
                std::ifstream in(sim_config_path);
                if (!in) throw InputError("cannot open config: " + sim_config_path);
                json j = json::parse(in, nullptr, true, true);
                runs.push_back({"", sim_config_from_json(j)});
                tag = "config";
            } else {
                throw InputError("simulate: need --preset or --config");
            }
            for (auto& run : runs) {
                if (sim_reps > 0) run.config.replications = sim_reps;
                if (sim_seed) run.config.seed = *sim_seed;
            }

            std::vector<std::pair<std::string, ExperimentResult>> results;
            for (const auto& run : runs) {
                results.emplace_back(run.label, run_experiment(run.config));
                std::cout << "ran " << tag << (run.label.empty() ? "" : " " + run.label) << ": "
                          << run.config.replications << " replications\n";
            }

            fs::create_directories(sim_out);
            write_replications_csv((fs::path(sim_out) / "replications.csv").string(), results, tag);
            json summary;
            summary["preset"] = tag;
            json per_run = json::array();
            for (std::size_t i = 0; i < results.size(); ++i) {
                json entry;
                entry["label"] = results[i].first;
                entry["config"] = to_json(runs[i].config);
                entry["methods"] = summary_to_json(results[i].second);
                per_run.push_back(entry);
            }
            summary["runs"] = per_run;
            write_text(fs::path(sim_out) / "summary.json", summary.dump(2) + "\n");
            return kExitOk;
        }

        if (*base_cmd) {
            Dataset data = load_dataset(base_args);
            fs::create_directories(base_out);
            json report = baseline_estimates(data);
            write_text(fs::path(base_out) / "baselines.json", report.dump(2) + "\n");
            std::cout << "baselines written\n";
            return kExitOk;
        }

        if (*eval_cmd) {
            Dataset data = load_dataset(eval_args);
            std::map<std::string, int> index;
            for (std::size_t i = 0; i < data.ids.size(); ++i)
                index[data.ids[i]] = static_cast<int>(i);
            auto groups_raw = read_group_members(eval_groups);
            std::vector<MatchedGroup> groups;
            for (const auto& members : groups_raw) {
                MatchedGroup grp;
                for (const auto& id : members) {
                    auto it = index.find(id);
                    if (it == index.end())
                        throw InputError("evaluate-matches: unknown unit id `" + id + "`");
                    grp.members.push_back(it->second);
                    if (data.t.treated(it->second))
                        ++grp.treated_count;
                    else
                        ++grp.control_count;
                }
                groups.push_back(std::move(grp));
            }
            const double mean_dist = match_quality_eval(groups, data.graph, data.t, eval_args.hops);
            fs::create_directories(eval_out);
            json report;
            report["groups"] = groups.size();
            report["mean_graph_distance"] = mean_dist;
            write_text(fs::path(eval_out) / "match_quality.json", report.dump(2) + "\n");
            std::cout << "mean graph distance: " << format_double(mean_dist) << "\n";
            return kExitOk;
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const SizeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const EstimationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEstimation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
