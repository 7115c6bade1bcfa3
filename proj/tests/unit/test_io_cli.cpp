#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "itev/itev.hpp"

using namespace itev;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "itev_unit" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args, const fs::path& out) {
    const std::string cmd = std::string(ITEV_CLI_PATH) + " " + args + " --out " + out.string() + " > " +
                            (out / "stdout.txt").string() + " 2> " + (out / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(ITEV_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Csv, EscapesAndUsesCrlf) {
    io::CsvWriter w({"a", "b"});
    w.row({"x,y", "say \"hi\""});
    EXPECT_EQ(w.str(), "a,b\r\n\"x,y\",\"say \"\"hi\"\"\"\r\n");
    EXPECT_THROW(w.row({"only one"}), InternalError);
}

TEST(FormatReal, RoundTripsAndSpecialValues) {
    EXPECT_EQ(io::format_real(0.1), "0.1");
    EXPECT_EQ(io::format_real(std::numeric_limits<Real>::infinity()), "inf");
    EXPECT_EQ(io::format_real(std::nan("")), "nan");
    const Real x = 1.0 / 3.0;
    EXPECT_EQ(std::stod(io::format_real(x)), x);
}

TEST(Config, ParsesDefaults) {
    const RunConfig cfg = parse_config(io::json::parse(R"({"contrast": {"kind": "polynomial", "data": [1.0]}})"));
    EXPECT_EQ(cfg.n, 64);
    EXPECT_EQ(cfg.weighting, Weighting::contrast);
    EXPECT_TRUE(cfg.contours.empty());
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_config(io::json::parse(R"({"n": 32})")), ConfigError);
    EXPECT_THROW(parse_config(io::json::parse(R"({"contrast": {"kind": "polynomial", "data": [1.0]}, "n": 4})")),
                 ConfigError);
    EXPECT_THROW(parse_config(io::json::parse(
                     R"({"contrast": {"kind": "polynomial", "data": [1.0]}, "weighting": "diagonal"})")),
                 ConfigError);
    EXPECT_THROW(parse_config(io::json::parse(R"({"contrast": {"kind": "spline", "data": [1.0]}})")), ConfigError);
    EXPECT_THROW(parse_config(io::json::parse(
                     R"({"contrast": {"kind": "piecewise", "data": [[2.0, 1.0], [1.0, 2.0]]}})")),
                 ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Cli, CheckPassesForPositiveContrast) {
    const fs::path out = scratch("check_ok");
    EXPECT_EQ(run_cli("check --config " + config("unit_contrast.json"), out), 0);
    EXPECT_TRUE(fs::exists(out / "coercivity.json"));
}

TEST(Cli, CheckFailsForSignChangingContrast) {
    const fs::path out = scratch("check_fail");
    EXPECT_EQ(run_cli("check --config " + config("sign_changing.json"), out), 2);
}

TEST(Cli, SolveRefusesFailingHypotheses) {
    const fs::path out = scratch("solve_fail");
    const fs::path cfg = out / "sign.json";
    std::ofstream(cfg) << R"({"contrast": {"kind": "piecewise", "data": [[0.05, -0.8], [0.95, 2.0], [1.0, 0.9]]},
                              "n": 24, "contours": [{"center": -20.0, "radius": 1.0}]})";
    EXPECT_EQ(run_cli("solve --config " + cfg.string(), out), 2);
    // Without contours the config itself is incomplete.
    EXPECT_EQ(run_cli("solve --config " + config("sign_changing.json"), out), 1);
}

TEST(Cli, ConfigErrors) {
    const fs::path out = scratch("config_err");
    EXPECT_EQ(run_cli("solve --config /nonexistent.json", out), 1);
    EXPECT_EQ(run_cli("solve --config " + config("index3.json") + " --n 2", out), 1);
    EXPECT_EQ(run_cli("frobnicate --config " + config("index3.json"), out), 1);
}

TEST(Cli, GrazingContourExitsThree) {
    const fs::path out = scratch("graze");
    const fs::path cfg = out / "graze.json";
    std::ofstream(cfg) << R"({"contrast": {"kind": "polynomial", "data": [8.0]}, "n": 32,
                              "contours": [{"center": -8.869604401089358, "radius": 1.0}]})";
    EXPECT_EQ(run_cli("solve --config " + cfg.string(), out), 3);
    EXPECT_NE(slurp(out / "stderr.txt").find("suggested radius"), std::string::npos);
}

TEST(Cli, SolveWithOracleCompare) {
    const fs::path out = scratch("solve");
    ASSERT_EQ(run_cli("solve --oracle-compare --n 48 --config " + config("index3.json"), out), 0);
    for (const char* f : {"eigenvalues.json", "eigenvalues.csv", "oracle_compare.csv"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const io::json j = io::read_json_file((out / "eigenvalues.json").string());
    EXPECT_TRUE(j.dump().find("subspace_rank") != std::string::npos);
}

TEST(Cli, OracleWritesRoots) {
    const fs::path out = scratch("oracle");
    ASSERT_EQ(run_cli("oracle --config " + config("index3.json"), out), 0);
    const std::string csv = slurp(out / "oracle_roots.csv");
    EXPECT_NE(csv.find("\r\n"), std::string::npos);
}

TEST(Cli, OutputIsDeterministic) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    ASSERT_EQ(run_cli("solve --n 32 --seed 5 --config " + config("index3.json"), a), 0);
    ASSERT_EQ(run_cli("solve --n 32 --seed 5 --config " + config("index3.json"), b), 0);
    EXPECT_EQ(slurp(a / "eigenvalues.json"), slurp(b / "eigenvalues.json"));
    EXPECT_EQ(slurp(a / "eigenvalues.csv"), slurp(b / "eigenvalues.csv"));
}
