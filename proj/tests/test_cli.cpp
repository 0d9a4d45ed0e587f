#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("iwave_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// exit status of `iwave <args>`, stdout and stderr discarded into files under `dir`
int run(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string("\"") + IWAVE_CLI_PATH + "\" " + args + " >\"" + (dir / "stdout").string() +
                            "\" 2>\"" + (dir / "stderr").string() + "\"";
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int csv_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    int n = -1;  // header
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

}  // namespace

TEST_CASE("check-ms exit codes") {
    const fs::path d = scratch("ms");
    CHECK(run("check-ms --preset superellipse4 --lambda 0.7071 --out \"" + d.string() + "\"", d) == 0);
    const auto rep = nlohmann::json::parse(slurp(d / "check-ms.json"));
    CHECK(rep["ms"].get<bool>());
    CHECK(run("check-ms --preset circle --out \"" + d.string() + "\"", d) == 2);
}

TEST_CASE("usage errors exit 1 with a JSON message") {
    const fs::path d = scratch("usage");
    CHECK(run("check-ms --lambda 1.5 --out \"" + d.string() + "\"", d) == 1);
    const auto err = nlohmann::json::parse(slurp(d / "stderr"));
    CHECK(err["status"] == "error");
    CHECK(err["kind"] == "usage");
    CHECK(run("frobnicate", d) == 1);
    CHECK(run("eigenscan --box 1,0,0,1 --out \"" + d.string() + "\"", d) == 1);
    CHECK(run("solve --grid 4 --out \"" + d.string() + "\"", d) == 1);
    CHECK(run("check-ms --preset nonsense --out \"" + d.string() + "\"", d) == 1);
}

TEST_CASE("eigenscan writes one row per cell and is deterministic") {
    const fs::path a = scratch("scan_a"), b = scratch("scan_b");
    const std::string args = "eigenscan --grid 16 --cells 2 --nu 1e-3,1e-4 --jobs 2";
    REQUIRE(run(args + " --out \"" + a.string() + "\"", a) == 0);
    REQUIRE(run(args + " --out \"" + b.string() + "\"", b) == 0);
    CHECK(csv_rows(a / "eigenscan.csv") == 2 * 2 * 2);
    CHECK(slurp(a / "eigenscan.csv") == slurp(b / "eigenscan.csv"));
    CHECK(fs::exists(a / "eigenscan_nu0.svg"));
    CHECK(fs::exists(a / "eigenscan_nu1.svg"));
    const auto rep = nlohmann::json::parse(slurp(a / "eigenscan.json"));
    CHECK(rep["floor_scaled"].size() == 2);
}

TEST_CASE("config file overrides flags") {
    const fs::path d = scratch("config");
    {
        std::ofstream cfg(d / "cfg.json");
        cfg << R"({"preset": "circle", "lambda": 0.6})";
    }
    // the flag says superellipse4 (MS), the config says circle (not MS)
    CHECK(run("check-ms --preset superellipse4 --config \"" + (d / "cfg.json").string() + "\" --out \"" +
                  d.string() + "\"",
              d) == 2);
    const auto rep = nlohmann::json::parse(slurp(d / "check-ms.json"));
    CHECK(rep["lambda"].get<double>() == 0.6);
    {
        std::ofstream cfg(d / "bad.json");
        cfg << "{not json";
    }
    CHECK(run("check-ms --config \"" + (d / "bad.json").string() + "\" --out \"" + d.string() + "\"", d) == 1);
}

TEST_CASE("billiard artifacts") {
    const fs::path d = scratch("billiard");
    REQUIRE(run("billiard --steps 50 --out \"" + d.string() + "\"", d) == 0);
    CHECK(csv_rows(d / "billiard_trajectory.csv") == 51);
    CHECK(csv_rows(d / "billiard_b2.csv") > 100);
    CHECK(fs::exists(d / "billiard_trajectory.svg"));
}

TEST_CASE("small solve") {
    const fs::path d = scratch("solve");
    REQUIRE(run("solve --grid 24 --out \"" + d.string() + "\"", d) == 0);
    const auto rep = nlohmann::json::parse(slurp(d / "solve.json"));
    CHECK(rep["residual"].get<double>() < 1e-8);
    CHECK(rep["green_residual"].get<double>() < 1e-6);
    CHECK(csv_rows(d / "solve_field.csv") == 23 * 24);
}
