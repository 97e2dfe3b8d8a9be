#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "soh/runner.hpp"
#include "soh/snapshot.hpp"

using namespace soh;
namespace fs = std::filesystem;

namespace {

const char* kSmallCollision =
    "scenario = collision\n"
    "nx = 40\n"
    "ny = 40\n"
    "dx = 0.025\n"
    "dy = 0.025\n"
    "t_end = 0.005\n"
    "snapshot_every = 5\n";

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("soh_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(SOH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run summary on a small collision") {
    RunConfig cfg = parse_config(kSmallCollision);
    RunOptions opt;
    opt.write_files = false;
    const RunSummary s = run(cfg, opt);
    CHECK(s.steps == 10);
    CHECK(s.final_time == doctest::Approx(0.005));
    CHECK(s.closed_domain);
    CHECK(s.mass_drift <= 1e-10);
    CHECK(s.max_density <= 1.0);
    CHECK(s.output_dir.empty());
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("exit");
    write_file(dir / "ok.cfg", kSmallCollision);
    write_file(dir / "unknown.cfg", "scenario = collision\nbogus = 3\n");
    write_file(dir / "crowd.cfg", "scenario = crowd\nc = 2\n");

    CHECK(cli("run " + (dir / "ok.cfg").string() + " --output-dir " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "collision" / "diagnostics.tsv"));
    CHECK(fs::exists(dir / "out" / "collision" / "snapshot_000000.soh"));
    CHECK(fs::exists(dir / "out" / "collision" / "snapshot_000005.txt"));
    CHECK(fs::exists(dir / "out" / "collision" / "snapshot_000010.soh"));

    CHECK(cli("run " + (dir / "unknown.cfg").string()) == 2);
    CHECK(cli("run " + (dir / "crowd.cfg").string()) == 2);
    CHECK(cli("run") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("run " + (dir / "missing.cfg").string()) == 4);
    CHECK(cli("inspect " + (dir / "missing.soh").string()) == 4);
    write_file(dir / "junk.soh", "not a snapshot");
    CHECK(cli("inspect " + (dir / "junk.soh").string()) == 4);

    CHECK(cli("inspect " + (dir / "out" / "collision" / "snapshot_000010.soh").string()) == 0);
    CHECK(cli("inspect " + (dir / "out" / "collision" / "snapshot_000010.txt").string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical diagnostics") {
    const fs::path dir = scratch("repro");
    write_file(dir / "c.cfg", kSmallCollision);
    REQUIRE(cli("run " + (dir / "c.cfg").string() + " --output-dir " + (dir / "a").string()) == 0);
    REQUIRE(cli("run " + (dir / "c.cfg").string() + " --output-dir " + (dir / "b").string()) == 0);
    const std::string a = slurp(dir / "a" / "collision" / "diagnostics.tsv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / "collision" / "diagnostics.tsv"));
    CHECK(slurp(dir / "a" / "collision" / "snapshot_000010.soh") ==
          slurp(dir / "b" / "collision" / "snapshot_000010.soh"));

    // One header line plus steps 0..10.
    std::istringstream in(a);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 12);

    write_file(dir / "crowd.cfg",
               "scenario = crowd\nnx = 20\nny = 20\ndx = 0.05\ndy = 0.05\nt_end = 0.0025\nseed = 3\n");
    REQUIRE(cli("run " + (dir / "crowd.cfg").string() + " --output-dir " + (dir / "a").string()) == 0);
    REQUIRE(cli("run " + (dir / "crowd.cfg").string() + " --output-dir " + (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "crowd" / "diagnostics.tsv") == slurp(dir / "b" / "crowd" / "diagnostics.tsv"));
    REQUIRE(cli("run " + (dir / "crowd.cfg").string() + " --seed 4 --output-dir " + (dir / "c").string()) == 0);
    CHECK(slurp(dir / "a" / "crowd" / "snapshot_000000.soh") != slurp(dir / "c" / "crowd" / "snapshot_000000.soh"));
    fs::remove_all(dir);
}

TEST_CASE("output root from the environment") {
    const fs::path dir = scratch("env");
    RunConfig cfg = parse_config(kSmallCollision);
    RunOptions opt;
    ::setenv("SOH_OUTPUT_DIR", (dir / "env").c_str(), 1);
    CHECK(resolve_output_dir(cfg, opt) == (dir / "env").string());
    cfg.output_dir = (dir / "cfg").string();
    CHECK(resolve_output_dir(cfg, opt) == (dir / "cfg").string());
    opt.output_dir = (dir / "opt").string();
    CHECK(resolve_output_dir(cfg, opt) == (dir / "opt").string());
    ::unsetenv("SOH_OUTPUT_DIR");
    CHECK(resolve_output_dir(RunConfig{}, RunOptions{}) == "output");

    write_file(dir / "c.cfg", kSmallCollision);
    const std::string cmd = "SOH_OUTPUT_DIR=" + (dir / "viaenv").string() + " " + SOH_CLI_PATH + " run " +
                            (dir / "c.cfg").string() + " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(dir / "viaenv" / "collision" / "diagnostics.tsv"));
    fs::remove_all(dir);
}

TEST_CASE("small sweep") {
    RunConfig cfg = parse_config(
        "scenario = sweep\nnx = 40\nny = 40\ndx = 0.025\ndy = 0.025\nt_end = 0.005\nepsilons = 1e-2, 1e-6\n");
    RunOptions opt;
    opt.write_files = false;
    const SweepSummary s = run_sweep(cfg, opt);
    REQUIRE(s.entries.size() == 2);
    CHECK(s.all_ap_stable);
    for (const auto& e : s.entries) {
        CHECK(e.ap_steps == 10);
        CHECK(e.ap_max_density <= 1.0);
        CHECK(e.explicit_ran);
    }
}

}  // TEST_SUITE
