#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "s3cm/trace.hpp"

using namespace s3cm;
using namespace s3cm::cli;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = S3CM_FIXTURE_DIR;

struct Result {
  int code = 0;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "s3cm");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Result r;
  r.code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("s3cm_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const RunConfig d = parse("");
  CHECK(d.problem.kind == "synthetic");
  CHECK(d.schedule.kind == "polynomial");
  CHECK(d.solver.iters == 1000);
  CHECK(d.trace_file == "trace.csv");

  const RunConfig c = parse("[schedule]\nkind = recursive\neta = 0.3\n[solver]\nreplicas = 4\n");
  CHECK(c.schedule.kind == "recursive");
  CHECK(c.schedule.eta == 0.3);
  CHECK(c.solver.replicas == 4);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("[solver]\nspeed = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[colour]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[solver]\niters = many\n"), ConfigError);
  CHECK_THROWS_AS(parse("[schedule]\nkind = cosine\n"), ConfigError);
  CHECK_THROWS_AS(load_config(kFixtures + "/nope.ini"), ConfigError);
}

TEST_CASE("run writes a trace and a summary") {
  const fs::path dir = scratch_dir("run");
  const auto r = invoke({"run", "--config", kFixtures + "/run_synthetic.ini", "--out-dir",
                         dir.string(), "--seed", "11"});
  REQUIRE_MESSAGE(r.code == kOk, r.err);
  std::ifstream trace_in(dir / "trace.csv");
  const auto rows = read_trace_csv(trace_in);
  CHECK(rows.size() > 10);
  CHECK(rows.back().n == 500);
  CHECK(rows.back().dist_sq.has_value());

  std::ifstream summary_in(dir / "summary.json");
  const auto j = nlohmann::json::parse(summary_in);
  CHECK(j["seed"] == 11);
  CHECK(j["replicas"] == 1);
  CHECK(j["schedule"]["kind"] == "polynomial");

  const auto again = invoke({"run", "--config", kFixtures + "/run_synthetic.ini", "--out-dir",
                             dir.string(), "--seed", "11"});
  std::ifstream second(dir / "trace.csv");
  CHECK(read_trace_csv(second).back().dist_sq == rows.back().dist_sq);
}

TEST_CASE("portfolio run on the fixture returns") {
  const fs::path dir = scratch_dir("portfolio");
  const auto r = invoke({"run", "--config", kFixtures + "/portfolio.ini", "--out-dir", dir.string()});
  REQUIRE_MESSAGE(r.code == kOk, r.err);
  std::ifstream summary_in(dir / "summary.json");
  const auto j = nlohmann::json::parse(summary_in);
  CHECK(j["replicas"] == 3);
  CHECK(j["problem"]["kind"] == "portfolio");
}

TEST_CASE("exit codes for configuration and data errors") {
  const fs::path dir = scratch_dir("errors");
  const auto bad = invoke({"run", "--config", kFixtures + "/bad_constant.ini", "--out-dir",
                           dir.string()});
  CHECK(bad.code == kConfigError);
  CHECK(bad.err.find("ε ≤ γ ≤ α(2L⁻¹ − ε)") != std::string::npos);

  const auto missing = invoke({"run", "--config", kFixtures + "/missing_csv.ini", "--out-dir",
                               dir.string()});
  CHECK(missing.code == kDataError);
  CHECK(missing.err.find("no_such_returns.csv") != std::string::npos);

  CHECK(invoke({"run", "--bogus"}).code == kConfigError);
  CHECK(invoke({"run", "--config", kFixtures + "/absent.ini"}).code == kConfigError);
  CHECK(invoke({"--help"}).code == kOk);
}

TEST_CASE("numerical abort exit code") {
  const fs::path dir = scratch_dir("abort");
  const fs::path ini = dir / "huge.ini";
  std::ofstream(ini) << "[problem]\nreference = false\n[schedule]\nkind = constant\n"
                        "gamma = 1e300\nlipschitz = 1e-300\n[solver]\niters = 200\n";
  const auto r = invoke({"run", "--config", ini.string(), "--out-dir", dir.string()});
  CHECK(r.code == kNumericalAbort);
}

TEST_CASE("prox-check prints one row per projection and property") {
  const auto r = invoke({"prox-check", "--seed", "3"});
  CHECK(r.code == kOk);
  CHECK(count_lines(r.out) == 17);
  CHECK(r.out.find("FAIL") == std::string::npos);
  const auto v = invoke({"prox-check", "--verbose"});
  CHECK(v.out.find("max_dev") != std::string::npos);
}

TEST_CASE("rates on a small configuration prints the four regimes") {
  const RunConfig cfg = load_config(kFixtures + "/rates_small.ini");
  const auto rows = rate_table(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].alpha == 0.5);
  CHECK(rows[0].predicted == -0.5);
  CHECK(rows[1].beta == 2.0);
  CHECK(rows[1].predicted == -1.0);
  CHECK(rows[3].beta == 0.5);
  CHECK(rows[3].predicted == -0.5);
  for (const auto& row : rows) CHECK(std::isfinite(row.fitted));
}
