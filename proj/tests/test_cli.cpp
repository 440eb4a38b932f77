#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("NETMATCH_CLI");
    REQUIRE(env != nullptr);
    return env;
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("netmatch_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Two disjoint edges plus isolated vertices, with two sacrificial holdout
// units. FLAME matches everything in round 0 and the ADE has a hand value:
// group {u0,u2,u3}: 10 - (6+8)/2 = 3 with weight 3; group {u4,u5}: 9 - 4 = 5
// with weight 2; ADE = (3*3 + 2*5) / 5 = 3.8.
struct Fixture {
    TempDir tmp;
    std::string edges;
    std::string units;
    Fixture() {
        edges = tmp.file("edges.csv", "src,dst\nu0,u1\nu2,u3\n");
        units = tmp.file("units.csv",
                         "id,treated,outcome\n"
                         "u0,1,10\n"
                         "u1,0,0\n"
                         "u2,0,6\n"
                         "u3,0,8\n"
                         "u4,1,9\n"
                         "u5,0,4\n"
                         "u6,1,7\n"
                         "u7,0,1\n");
    }
};

}  // namespace

TEST_CASE("estimate on the hand-computed fixture") {
    Fixture f;
    const std::string out = f.tmp.sub("out");
    const int code = run_cli("estimate --edges " + f.edges + " --units " + f.units +
                             " --holdout-ids u6,u7 --out-dir " + out);
    REQUIRE(code == 0);

    auto report = nlohmann::json::parse(slurp(out + "/estimates.json"));
    REQUIRE(report["flame"]["ok"].get<bool>());
    CHECK(report["flame"]["estimate"].get<double>() == Catch::Approx(3.8));
    CHECK(report["flame"]["groups"].get<int>() == 2);
    CHECK(!report.contains("naive"));

    CHECK(fs::exists(out + "/matched_groups.csv"));
    CHECK(fs::exists(out + "/drop_log.csv"));
    CHECK(fs::exists(out + "/id_map.csv"));

    SECTION("baselines all adds the five extra estimates") {
        const std::string out2 = f.tmp.sub("out2");
        REQUIRE(run_cli("estimate --edges " + f.edges + " --units " + f.units +
                        " --holdout-ids u6,u7 --baselines all --out-dir " + out2) == 0);
        auto rep2 = nlohmann::json::parse(slurp(out2 + "/estimates.json"));
        for (const char* m : {"naive", "eigen1", "eigenall", "stratified", "sania"})
            CHECK(rep2.contains(m));
    }
    SECTION("decile binning engages") {
        const std::string out3 = f.tmp.sub("out3");
        REQUIRE(run_cli("estimate --edges " + f.edges + " --units " + f.units +
                        " --holdout-ids u6,u7 --bins 10 --out-dir " + out3) == 0);
        CHECK(fs::exists(out3 + "/estimates.json"));
    }
}

TEST_CASE("estimate exit codes") {
    Fixture f;
    SECTION("missing file is exit 2") {
        CHECK(run_cli("estimate --edges /nonexistent.csv --units " + f.units) == 2);
    }
    SECTION("missing arm is exit 2") {
        auto bad = f.tmp.file("bad.csv", "id,treated,outcome\nu0,1,1\nu1,1,2\nu2,1,0\nu3,1,4\n");
        auto edges = f.tmp.file("bad_edges.csv", "src,dst\nu0,u1\nu2,u3\n");
        CHECK(run_cli("estimate --edges " + edges + " --units " + bad) == 2);
    }
}

TEST_CASE("census command emits census and components") {
    Fixture f;
    const std::string out = f.tmp.sub("census_out");
    REQUIRE(run_cli("census --edges " + f.edges + " --units " + f.units + " --out-dir " + out) ==
            0);
    const std::string census = slurp(out + "/census.csv");
    CHECK(census.rfind("unit,", 0) == 0);
    CHECK(std::count(census.begin(), census.end(), '\n') == 9);  // header + 8 units
    const std::string comps = slurp(out + "/components.csv");
    CHECK(comps.rfind("unit,treated_degree,", 0) == 0);
}

TEST_CASE("baselines command") {
    Fixture f;
    const std::string out = f.tmp.sub("base_out");
    REQUIRE(run_cli("baselines --edges " + f.edges + " --units " + f.units + " --out-dir " + out) ==
            0);
    auto rep = nlohmann::json::parse(slurp(out + "/baselines.json"));
    CHECK(rep["naive"]["ok"].get<bool>());
    // treated: 10, 9, 7; control: 0, 6, 8, 4, 1
    CHECK(rep["naive"]["estimate"].get<double>() ==
          Catch::Approx((10.0 + 9 + 7) / 3.0 - (0.0 + 6 + 8 + 4 + 1) / 5.0));
}

TEST_CASE("simulate command is deterministic and validates presets") {
    TempDir tmp;
    SECTION("unknown preset lists the options with exit 2") {
        CHECK(run_cli("simulate --preset nope --out-dir " + tmp.sub("x")) == 2);
    }
    SECTION("same seed, same files") {
        const std::string cfg = tmp.file("cfg.json",
                                         R"({"graph":{"model":"er","n":16,"q":0.1},)"
                                         R"("randomization":{"design":"complete","n_treated":8},)"
                                         R"("interference":{"kind":"none"},"replications":2,"seed":7})");
        REQUIRE(run_cli("simulate --config " + cfg + " --out-dir " + tmp.sub("b")) == 0);
        REQUIRE(run_cli("simulate --config " + cfg + " --out-dir " + tmp.sub("c")) == 0);
        CHECK(slurp(tmp.sub("b") + "/replications.csv") == slurp(tmp.sub("c") + "/replications.csv"));
        CHECK(slurp(tmp.sub("b") + "/summary.json") == slurp(tmp.sub("c") + "/summary.json"));
    }
    SECTION("preset run emits six methods") {
        const std::string out = tmp.sub("preset");
        REQUIRE(run_cli("simulate --preset exp1-s1 --reps 1 --seed 3 --out-dir " + out) == 0);
        auto summary = nlohmann::json::parse(slurp(out + "/summary.json"));
        REQUIRE(summary["runs"].size() == 1);
        CHECK(summary["runs"][0]["methods"].size() == 6);
    }
}

TEST_CASE("evaluate-matches command") {
    Fixture f;
    const std::string out = f.tmp.sub("est_out");
    REQUIRE(run_cli("estimate --edges " + f.edges + " --units " + f.units +
                    " --holdout-ids u6,u7 --out-dir " + out) == 0);
    const std::string eval_out = f.tmp.sub("eval_out");
    REQUIRE(run_cli("evaluate-matches --edges " + f.edges + " --units " + f.units + " --groups " +
                    out + "/matched_groups.csv --out-dir " + eval_out) == 0);
    auto rep = nlohmann::json::parse(slurp(eval_out + "/match_quality.json"));
    // round-0 groups share isomorphic neighborhoods, so the distance is 0
    CHECK(rep["mean_graph_distance"].get<double>() == Catch::Approx(0.0));
}
