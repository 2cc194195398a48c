#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Absolute so commands that cd elsewhere still find the binary.
std::string gwlab_bin() {
    const char* bin = std::getenv("GWLAB_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "GWLAB_BIN must point at the gwlab binary");
    return fs::absolute(bin).string();
}

fs::path scratch_root() {
    static fs::path root = [] {
        fs::path dir = fs::temp_directory_path() / ("gw_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }();
    return root;
}

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    fs::path dir = scratch_root() / (tag + "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run_cli(const std::string& args, const std::string& prefix = "") {
    static int counter = 0;
    fs::path out = scratch_root() / ("stdout_" + std::to_string(counter));
    fs::path err = scratch_root() / ("stderr_" + std::to_string(counter));
    ++counter;
    std::string cmd = prefix + gwlab_bin() + " " + args + " >" + out.string() +
                      " 2>" + err.string();
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

}  // namespace

TEST_CASE("exact prints closed-form scalars") {
    auto r = run_cli("exact --v2 --beta 1,3,0");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "1.5\n");

    CHECK(run_cli("exact --v2inf --beta 0,1,2").out == "1.3333333333333333\n");
    CHECK(run_cli("exact --mu 0 --beta 1,3,0").out == "0.5\n");
    CHECK(run_cli("exact --transience-b --beta 1,0,1.5").out == "54\n");
    CHECK(run_cli("exact --vitesse 2 --beta 1,0,2").out == "27\n");
}

TEST_CASE("verdict prints the region predicates as json") {
    auto r = run_cli("verdict --beta 1,60,1.5 --n 5");
    CHECK(r.exit_code == 0);
    json v = json::parse(r.out);
    CHECK(v["label"] == "transient-proved");
    CHECK(v["transience"] == true);
    CHECK(v["transience_B"] == 54.0);
    CHECK(v["n"] == 5);
}

TEST_CASE("failures yield machine-readable json and nonzero exit") {
    SUBCASE("violated closed-form precondition") {
        auto r = run_cli("exact --v2 --beta 3,1,0");
        CHECK(r.exit_code != 0);
        CHECK(r.out.empty());
        json e = json::parse(r.err);
        CHECK(e["error"].get<std::string>().find("beta1") != std::string::npos);
    }
    SUBCASE("case and rate-ordering mismatch") {
        auto r = run_cli("comb --beta 1,2,3 --n 3 --case e1 --enumerate");
        CHECK(r.exit_code != 0);
        json e = json::parse(r.err);
        CHECK(e["error"].get<std::string>().find("e1") != std::string::npos);
    }
    SUBCASE("unknown flag") {
        auto r = run_cli("exact --bogus 1 --beta 1,3,0");
        CHECK(r.exit_code != 0);
        CHECK(json::parse(r.err).contains("error"));
    }
    SUBCASE("missing required flag") {
        auto r = run_cli("speed --n 2 --horizon 10");
        CHECK(r.exit_code != 0);
        CHECK(json::parse(r.err).contains("error"));
    }
    SUBCASE("missing subcommand") {
        auto r = run_cli("");
        CHECK(r.exit_code != 0);
        CHECK(json::parse(r.err).contains("error"));
    }
    SUBCASE("help exits zero") { CHECK(run_cli("--help").exit_code == 0); }
}

TEST_CASE("simulate is deterministic in the seed and writes the artifacts") {
    auto a = fresh_dir("sim_a");
    auto b = fresh_dir("sim_b");
    auto c = fresh_dir("sim_c");
    std::string flags = "simulate --beta 2,3,1 --n 6 --horizon 40 --snapshots 10";
    CHECK(run_cli(flags + " --seed 7 --out " + a.string()).exit_code == 0);
    CHECK(run_cli(flags + " --seed 7 --out " + b.string()).exit_code == 0);
    CHECK(run_cli(flags + " --seed 8 --out " + c.string()).exit_code == 0);
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "trajectory.csv") != slurp(c / "trajectory.csv"));

    json side = json::parse(slurp(a / "trajectory.json"));
    CHECK(side["beta"] == json::array({2.0, 3.0, 1.0}));
    CHECK(side["boundary"] == "zero");
    CHECK(side["seed"] == 7);
    CHECK(side["horizon"] == 40.0);
    CHECK(side["event_count"].get<long long>() > 0);

    json manifest = json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["seed"] == 7);
    CHECK(manifest["tool_version"].is_string());
    CHECK(manifest["outputs"] == json::array({"trajectory.csv", "trajectory.json"}));
    CHECK(manifest["config"]["beta"] == "2,3,1");
}

TEST_CASE("a manifest config reproduces the run byte for byte") {
    auto a = fresh_dir("cfg_a");
    auto b = fresh_dir("cfg_b");
    std::string flags = "speed --beta 1,3,2 --n 2 --horizon 150 --replicas 6 --seed 11";
    auto first = run_cli(flags + " --out " + a.string());
    CHECK(first.exit_code == 0);

    json manifest = json::parse(slurp(a / "manifest.json"));
    fs::path cfg_file = scratch_root() / "replay.json";
    std::ofstream(cfg_file) << manifest["config"].dump();
    auto second = run_cli("speed --config " + cfg_file.string() + " --out " + b.string());
    CHECK(second.exit_code == 0);
    CHECK(second.out == first.out);
    CHECK(slurp(a / "speed.json") == slurp(b / "speed.json"));
}

TEST_CASE("explicit flags override config values") {
    fs::path cfg_file = scratch_root() / "override.json";
    std::ofstream(cfg_file) << R"({"beta":"1,3,0","v2":true})";
    CHECK(run_cli("exact --config " + cfg_file.string()).out == "1.5\n");
    CHECK(run_cli("exact --config " + cfg_file.string() + " --beta 1,2,0").out ==
          "1.3333333333333333\n");
}

TEST_CASE("thread count does not change results") {
    std::string flags = "speed --beta 1,2,3 --n 3 --horizon 100 --replicas 5 --seed 3";
    auto serial = run_cli(flags + " --threads 1");
    auto threaded = run_cli(flags + " --threads 4");
    CHECK(serial.exit_code == 0);
    CHECK(serial.out == threaded.out);
}

TEST_CASE("commands write only under --out") {
    auto cwd = fresh_dir("cwd");
    auto out = fresh_dir("only_out");
    auto r = run_cli("simulate --beta 1,2,3 --n 3 --horizon 10 --seed 1 --out " + out.string(),
                     "cd " + cwd.string() + " && ");
    CHECK(r.exit_code == 0);
    CHECK(fs::is_empty(cwd));
    std::set<std::string> names;
    for (auto& entry : fs::directory_iterator(out)) names.insert(entry.path().filename());
    CHECK(names == std::set<std::string>{"manifest.json", "trajectory.csv", "trajectory.json"});
}

TEST_CASE("couple reports the prefix-embedding order") {
    auto r = run_cli("couple --beta 1,2,3 --n 3 --n-alt 5 --horizon 5 --snapshots 1 --seed 2");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["shared_sites"] == 3);
    CHECK(j["first_leq_second"] == true);
}

TEST_CASE("sweep writes the table plus both manifests") {
    auto out = fresh_dir("sweep_out");
    auto r = run_cli("sweep --n 2 --beta1-grid 2,3 --beta2-grid 0.5 --horizon 25 --replicas 3"
                     " --seed 5 --out " + out.string());
    CHECK(r.exit_code == 0);
    json summary = json::parse(r.out);
    CHECK(summary["points"] == 2);
    CHECK(summary["ok"] == 2);

    std::ifstream csv(out / "sweep.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "n,beta1,beta2,verdict,cond_prior,cond_a,cond_b,cond_c,comb_case,"
          "transience_B,returns,last_return,occupation,alpha_hat,speed_mean,status");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 2);

    json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["command"] == "sweep");
    CHECK(manifest["outputs"] == json::array({"sweep.csv", "sweep_manifest.json"}));
    json sweep_manifest = json::parse(slurp(out / "sweep_manifest.json"));
    CHECK(sweep_manifest["seed"] == 5);
    CHECK(sweep_manifest["spec"]["beta0"] == 1.0);
}

TEST_CASE("cleanup scratch dir") { fs::remove_all(scratch_root()); }
