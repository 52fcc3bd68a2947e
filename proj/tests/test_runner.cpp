#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "coalweb/config.hpp"
#include "coalweb/path.hpp"
#include "coalweb/runner.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace coalweb;

namespace {

RunReport run_text(const std::string& text, const RunOptions& opt = {}) {
    return run_experiment(Config::parse_text(text), opt);
}

nlohmann::json json_without_timing(const RunReport& rep) {
    nlohmann::json j = nlohmann::json::parse(report_json_text(rep));
    j.erase("wall_clock_ms");
    j.erase("threads");
    return j;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("coalweb_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("eta experiment rows, checks and determinism") {
    const std::string text =
        "kind = eta\n"
        "n_replicas = 60\n"
        "seed = 4\n"
        "delta = 0.1\n";
    RunReport a = run_text(text, {{}, 1, "."});
    RunReport b = run_text(text, {{}, 3, "."});

    REQUIRE(a.rows.size() == 3);
    CHECK(a.rows[0].stat == "eta_mean");
    CHECK(a.rows[1].stat == "eta_p2");
    CHECK(a.rows[2].stat == "eta_p3");
    CHECK(a.rows[0].n == 60);
    CHECK(a.rows[0].extra.rfind("hist=", 0) == 0);
    REQUIRE(a.checks.size() == 2);
    CHECK(a.checks[0].name == "eta_mean_band(delta=0.1)");
    CHECK(a.checks[1].name == "eta_tail_bound(delta=0.1)");

    // identical numbers whatever the thread count
    CHECK(results_csv_text(a) == results_csv_text(b));
    CHECK(json_without_timing(a) == json_without_timing(b));
}

TEST_CASE("seed option overrides the config") {
    const std::string text = "kind = eta\nn_replicas = 20\nseed = 4\ndelta = 0.25\n";
    RunReport from_cfg = run_text(text);
    RunReport forced = run_text(text, {9, {}, "."});
    CHECK(from_cfg.root_seed == 4);
    CHECK(forced.root_seed == 9);
    CHECK(results_csv_text(from_cfg) != results_csv_text(forced));
}

TEST_CASE("zero replicas produce an empty passing report") {
    RunReport rep = run_text("kind = eta\nn_replicas = 0\n");
    CHECK(rep.rows.empty());
    CHECK(rep.checks.empty());
    CHECK(rep.all_pass());
}

TEST_CASE("config validation failures") {
    CHECK_THROWS_AS(run_text("kind = nonsense\n"), ConfigError);
    CHECK_THROWS_AS(run_text("kind = eta\nbogus_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(run_text("n_replicas = 5\n"), ConfigError);
    CHECK_THROWS_AS(run_text("kind = tightness\n"), ConfigError);  // tightness.t required
}

TEST_CASE("tightness experiment emits the scaled statistics") {
    RunReport rep = run_text(
        "kind = tightness\n"
        "n_replicas = 50\n"
        "delta = 0.25\n"
        "tightness.t = 0.25\n"
        "tightness.u = 1\n");
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].stat == "g");
    CHECK(rep.rows[1].stat == "g_over_t32");
    CHECK(rep.rows[2].stat == "g_u4_over_t2");
    CHECK(rep.rows[0].u == 1.0);
    CHECK(rep.checks.empty());
}

TEST_CASE("bstats rows per epsilon") {
    RunReport rep = run_text(
        "kind = bstats\n"
        "n_replicas = 80\n"
        "delta = 0.2\n"
        "bstats.epsilon = 0.8, 0.4\n");
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.rows[0].stat == "b1");
    CHECK(rep.rows[1].stat == "b2");
    CHECK(rep.rows[0].epsilon == 0.8);
    CHECK(rep.rows[2].epsilon == 0.4);
}

TEST_CASE("donsker experiment with thresholds") {
    RunReport rep = run_text(
        "kind = donsker\n"
        "n_replicas = 400\n"
        "delta = 0.05\n"
        "donsker.dist = 0.2\n"
        "donsker.ks_threshold = 0.2\n");
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].stat == "ks_marginal");
    CHECK(rep.rows[1].stat == "meet_cdf_dev");
    REQUIRE(rep.checks.size() == 2);
    CHECK(rep.checks[0].name == "donsker_marginal_ks");
    CHECK(rep.checks[1].name == "donsker_meet_cdf");
    CHECK(rep.all_pass());
}

TEST_CASE("dual identity experiment passes exactly") {
    RunReport rep = run_text(
        "kind = dual\n"
        "n_replicas = 40\n"
        "seed = 12\n");
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].stat == "dual_identity_failures");
    CHECK(rep.rows[0].estimate == 0.0);
    CHECK(rep.rows[1].stat == "dual_eta_mean");
    REQUIRE(rep.checks.size() == 1);
    CHECK(rep.checks[0].name == "dual_identity");
    CHECK(rep.all_pass());
}

TEST_CASE("census experiment balances on the torus") {
    RunReport rep = run_text(
        "kind = census\n"
        "n_replicas = 3\n"
        "seed = 2\n");
    REQUIRE(rep.rows.size() == 6);
    CHECK(rep.rows[0].stat == "census_fwd_in0");
    CHECK(rep.rows[5].stat == "census_dual_in2");
    REQUIRE(rep.checks.size() == 2);
    CHECK(rep.all_pass());
}

TEST_CASE("skeleton experiment is non-crossing") {
    RunReport rep = run_text(
        "kind = skeleton\n"
        "n_replicas = 20\n"
        "skeleton.dt = 0.01\n");
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].stat == "skeleton_noncross_failures");
    CHECK(rep.rows[0].estimate == 0.0);
    CHECK(rep.rows[1].stat == "skeleton_mean_merged");
    CHECK(rep.all_pass());
}

TEST_CASE("metrics experiment audits the axioms") {
    RunReport rep = run_text(
        "kind = metrics\n"
        "n_replicas = 60\n");
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.rows[0].stat == "metric_rho_violations");
    CHECK(rep.rows[0].estimate == 0.0);
    REQUIRE(rep.checks.size() == 1);
    CHECK(rep.checks[0].name == "metric_axioms");
    CHECK(rep.all_pass());
}

TEST_CASE("run_and_write emits both files and returns the check status") {
    TempDir dir("run");
    std::filesystem::path cfg_path = dir.path / "exp.cfg";
    {
        std::ofstream f(cfg_path);
        f << "kind = census\nn_replicas = 2\nseed = 5\n";
    }
    RunOptions opt;
    opt.out_dir = (dir.path / "out").string();
    CHECK(run_and_write(cfg_path.string(), opt) == 0);

    std::string csv = slurp(dir.path / "out" / "results.csv");
    Config cfg = Config::parse_file(cfg_path.string());
    CHECK(csv.rfind("# config_hash=" + hex_u64(cfg.hash()) + " root_seed=5\n", 0) == 0);

    nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "out" / "report.json"));
    CHECK(j["all_pass"] == true);
    CHECK(j["config"]["kind"] == "census");

    // byte-identical on a rerun
    RunOptions opt2 = opt;
    opt2.out_dir = (dir.path / "out2").string();
    CHECK(run_and_write(cfg_path.string(), opt2) == 0);
    CHECK(slurp(dir.path / "out2" / "results.csv") == csv);
}

TEST_CASE("path export writes a readable tagged pathset") {
    TempDir dir("export");
    std::filesystem::path cfg_path = dir.path / "web.cfg";
    {
        std::ofstream f(cfg_path);
        f << "kind = eta\nseed = 3\ndelta = 0.5\n"
          << "window.i_min = -6\nwindow.i_max = 6\nwindow.t_min = 0\nwindow.t_max = 6\n";
    }
    RunOptions opt;
    opt.out_dir = dir.path.string();
    CHECK(export_paths(cfg_path.string(), "pathset", opt) == 0);

    std::string text = slurp(dir.path / "paths.txt");
    Config cfg = Config::parse_file(cfg_path.string());
    CHECK(text.rfind("# config_hash=" + hex_u64(cfg.hash()) + " root_seed=3\n", 0) == 0);

    std::istringstream is(text);
    PathSet ps = read_pathset(is);
    CHECK(ps.provenance == Provenance::discrete_web);
    CHECK(ps.delta == 0.5);
    CHECK(ps.paths.size() == 46);  // half the cells of a 13 x 7 window

    CHECK_THROWS_AS(export_paths(cfg_path.string(), "json", opt), ConfigError);

    // skeleton export uses the construction grid
    std::filesystem::path sk_path = dir.path / "sk.cfg";
    {
        std::ofstream f(sk_path);
        f << "kind = skeleton\nseed = 3\nskeleton.seeds = 0,0; 0.5,0\nskeleton.dt = 0.05\n";
    }
    CHECK(export_paths(sk_path.string(), "pathset", opt) == 0);
    std::istringstream is2(slurp(dir.path / "paths.txt"));
    PathSet sk = read_pathset(is2);
    CHECK(sk.provenance == Provenance::skeleton);
    CHECK(sk.paths.size() == 2);
}
