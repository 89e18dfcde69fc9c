#include "mfglab/cli.hpp"
#include "mfglab/config.hpp"
#include "mfglab/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace mfglab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("mfglab_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::vector<fs::path> runs(const fs::path& root, const std::string& prefix) {
    std::vector<fs::path> out;
    if (!fs::exists(root)) return out;
    for (const auto& e : fs::directory_iterator(root))
        if (e.path().filename().string().rfind(prefix, 0) == 0) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

const char* kSingleton = R"({
  "model": {"n": 1, "m": 1, "T": 1, "K": 40, "x0": [1], "A": 0.3, "F": 0.5, "sigma": [0.2]},
  "gamma": {"type": "singleton", "point": [0]},
  "solver": {"paths": 200}
})";

const char* kScalar = R"({
  "model": {"n": 1, "m": 1, "T": 1, "K": 20, "x0": [0.5], "B": 1, "F": 0.5, "sigma": [0.4], "G": 0.5},
  "gamma": {"type": "box", "lower": [-0.3], "upper": [0.6]},
  "solver": {"paths": 1000},
  "experiment": {"Ns": [5, 20, 80, 200], "nash_Ns": [5, 10, 20, 40], "reps": 4, "agents": 6,
                 "lattice_points": 201}
})";

} // namespace

TEST_CASE("validate command") {
    TempDir tmp("validate");
    write(tmp / "ok.json", R"({"model": {"n": 1, "m": 1, "T": 1, "B": 1}})");
    write(tmp / "r0.json", R"({"model": {"n": 1, "m": 1, "T": 1, "R": 0}})");
    write(tmp / "noT.json", R"({"model": {"n": 1, "m": 1}})");
    CHECK(run_cli({"validate", "--config", tmp / "ok.json"}) == kExitOk);
    CHECK(run_cli({"validate", "--config", tmp / "r0.json"}) == kExitInvalid);
    CHECK(run_cli({"validate", "--config", tmp / "noT.json"}) == kExitInvalid);
    CHECK(run_cli({"validate", "--config", tmp / "missing.json"}) == kExitInvalid);
    CHECK(run_cli({"frobnicate"}) == kExitInvalid);
}

TEST_CASE("solve writes the exponential mean for a singleton control") {
    TempDir tmp("singleton");
    write(tmp / "c.json", kSingleton);
    const std::string out = tmp / "runs";
    REQUIRE(run_cli({"solve", "--config", tmp / "c.json", "--out", out}) == kExitOk);
    REQUIRE(run_cli({"solve", "--config", tmp / "c.json", "--out", out}) == kExitOk);
    const auto dirs = runs(out, "solve-");
    REQUIRE(dirs.size() == 2);
    CHECK(dirs[0] != dirs[1]);
    for (const char* f : {"zstar.csv", "mean_control.csv", "policy.csv", "diagnostics.csv", "manifest.json"}) {
        CHECK(read_text((dirs[0] / f).string()) == read_text((dirs[1] / f).string()));
    }
    const CsvTable z = read_csv((dirs[0] / "zstar.csv").string());
    REQUIRE(z.rows.size() == 41);
    double err = 0.0;
    for (const auto& row : z.rows) {
        const double t = std::stod(row[0]);
        err = std::max(err, std::abs(std::stod(row[1]) - std::exp(0.8 * t)));
    }
    // Euler grid error plus the Monte Carlo mean of sigma W.
    CHECK(err <= 2.0 * (1.0 / 40) + 4.0 * 0.2 / std::sqrt(200.0));
}

TEST_CASE("solve records the riccati cross-check for full space") {
    TempDir tmp("full");
    write(tmp / "c.json", R"({
      "model": {"n": 1, "m": 1, "T": 1, "K": 20, "x0": [1], "B": 1, "F": 0.5, "sigma": [0.5]},
      "solver": {"paths": 2000}
    })");
    REQUIRE(run_cli({"solve", "--config", tmp / "c.json", "--out", tmp / "runs"}) == kExitOk);
    const auto dir = runs(tmp.path / "runs", "solve-").at(0);
    const std::string manifest = read_text((dir / "manifest.json").string());
    CHECK(manifest.find("\"status\": \"converged\"") != std::string::npos);
    CHECK(manifest.find("\"kind\": \"riccati\"") != std::string::npos);
    CHECK(manifest.find("\"z_max_rel_error\"") != std::string::npos);
    CHECK(manifest.find("\"config_hash\"") != std::string::npos);
    CHECK(manifest.find("\"seed\": 1") != std::string::npos);
}

TEST_CASE("oracle command on the tanh instance") {
    TempDir tmp("oracle");
    write(tmp / "c.json", R"({"model": {"n": 1, "m": 1, "T": 1, "K": 200, "x0": [1], "B": 1}})");
    REQUIRE(run_cli({"oracle", "--config", tmp / "c.json", "--out", tmp / "runs"}) == kExitOk);
    const auto dir = runs(tmp.path / "runs", "oracle-").at(0);
    const CsvTable r = read_csv((dir / "riccati.csv").string());
    const int ct = r.column("t"), cp = r.column("P_11");
    double err = 0.0;
    for (const auto& row : r.rows) err = std::max(err, std::abs(std::stod(row[cp]) - std::tanh(1.0 - std::stod(row[ct]))));
    CHECK(err <= 1e-8);
    const CsvTable dp = read_csv((dir / "dp.csv").string());
    CHECK(dp.header == std::vector<std::string>{"t", "x", "value", "policy"});
    CHECK(dp.rows.size() == 201u * 801u);
}

TEST_CASE("downstream commands need a matching solve run") {
    TempDir tmp("downstream");
    write(tmp / "c.json", kScalar);
    const std::string out = tmp / "runs";
    CHECK(run_cli({"rates", "--config", tmp / "c.json", "--out", out}) == kExitInvalid);
    REQUIRE(run_cli({"solve", "--config", tmp / "c.json", "--out", out}) == kExitOk);
    const std::string solve = runs(out, "solve-").at(0).string();

    write(tmp / "other.json", R"({"model": {"n": 1, "m": 1, "T": 1, "K": 20, "B": 2}})");
    CHECK(run_cli({"rates", "--config", tmp / "other.json", "--from", solve, "--out", out}) == kExitInvalid);
    CHECK(run_cli({"rates", "--config", tmp / "c.json", "--from", tmp.path.string(), "--out", out}) == kExitIo);

    for (const char* cmd : {"rates", "nash", "population", "oracle"}) {
        CHECK(run_cli({cmd, "--from", solve, "--out", out}) == kExitOk);
        CHECK(run_cli({cmd, "--config", tmp / "c.json", "--from", solve, "--out", out}) == kExitOk);
        const auto dirs = runs(out, std::string(cmd) + "-");
        REQUIRE(dirs.size() == 2);
        for (const auto& e : fs::directory_iterator(dirs[0])) {
            const std::string name = e.path().filename().string();
            CHECK_MESSAGE(read_text(e.path().string()) == read_text((dirs[1] / name).string()), cmd << "/" << name);
        }
    }
    const CsvTable fits = read_csv((runs(out, "rates-").at(0) / "fits.csv").string());
    CHECK(fits.header == std::vector<std::string>{"metric", "slope", "stderr", "intercept", "C_bound"});
    const CsvTable nash = read_csv((runs(out, "nash-").at(0) / "nash.csv").string());
    CHECK(nash.header == std::vector<std::string>{"N", "rep", "deviation_id", "cost_dev", "cost_eq", "gap"});
    CHECK(read_csv((runs(out, "population-").at(0) / "costs.csv").string()).rows.size() == 4u * 6u);
    CHECK(run_cli({"population", "--from", solve, "--out", out, "--agents", "3", "--reps", "2"}) == kExitOk);
}

TEST_CASE("output root resolution and exit codes") {
    TempDir tmp("outroot");
    write(tmp / "c.json", kSingleton);
    setenv("MFGLAB_OUT", (tmp / "envroot").c_str(), 1);
    CHECK(run_cli({"solve", "--config", tmp / "c.json"}) == kExitOk);
    unsetenv("MFGLAB_OUT");
    CHECK(runs(tmp.path / "envroot", "solve-").size() == 1);

    write(tmp / "blocker", "x");
    CHECK(run_cli({"solve", "--config", tmp / "c.json", "--out", tmp / "blocker/sub"}) == kExitIo);

    write(tmp / "slow.json", R"({
      "model": {"n": 1, "m": 1, "T": 1, "K": 10, "x0": [1], "B": 1, "F": 0.5, "sigma": [0.5]},
      "solver": {"paths": 300, "max_outer": 1}
    })");
    CHECK(run_cli({"solve", "--config", tmp / "slow.json", "--out", tmp / "runs"}) == kExitNotConverged);
    const auto dirs = runs(tmp.path / "runs", "solve-");
    REQUIRE(dirs.size() == 1);
    CHECK(fs::exists(dirs[0] / "diagnostics.csv"));
}

TEST_CASE("flags override the config") {
    TempDir tmp("flags");
    write(tmp / "c.json", kSingleton);
    REQUIRE(run_cli({"solve", "--config", tmp / "c.json", "--out", tmp / "runs", "--steps", "10", "--paths", "50",
                     "--seed", "9", "--threads", "1"}) == kExitOk);
    const auto dir = runs(tmp.path / "runs", "solve-").at(0);
    CHECK(read_csv((dir / "zstar.csv").string()).rows.size() == 11);
    const std::string manifest = read_text((dir / "manifest.json").string());
    CHECK(manifest.find("\"seed\": 9") != std::string::npos);
    CHECK(manifest.find("\"paths\": 50") != std::string::npos);
}
