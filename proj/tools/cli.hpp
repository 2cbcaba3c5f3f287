#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "s3cm/kernels.hpp"

namespace s3cm::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // prox-check or rates found a failing row
  kConfigError = 2,
  kDataError = 3,
  kNumericalAbort = 4,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::string kind = "synthetic";  // synthetic | portfolio | svm
  // synthetic
  std::size_t dim = 20;
  std::size_t rows = 100;
  double condition = 1.0;
  double noise = 1.0;
  double mu = 1.0;
  std::uint64_t problem_seed = 1;
  // portfolio
  std::string returns_path;
  char delimiter = ',';
  std::optional<double> b_return;
  double test_fraction = 0.1;
  std::uint64_t split_seed = 1;
  // svm
  std::string data_path;
  std::optional<std::size_t> data_dim;
  std::size_t examples = 200;
  std::size_t features = 10;
  double C = 1.0;
  double sigma = 0.25;
  // reference solution for dist_sq
  bool reference = true;
  std::size_t reference_iters = 100000;
};

struct ScheduleConfig {
  std::string kind = "polynomial";  // polynomial | recursive | constant
  double gamma0 = 1.0;
  double alpha = 1.0;
  double eta = 0.1;
  std::optional<double> mu_h;  // defaults to the oracle's constant
  double mu_g = 0.0;
  std::optional<double> gamma;      // constant; defaults to 1/L
  std::optional<double> lipschitz;  // constant; defaults to the oracle's L
  double epsilon = 1e-6;
  double alpha_r = 0.99;
};

struct SolverConfig {
  std::string kind = "s3cm";  // s3cm | smcm | deterministic
  std::size_t iters = 1000;
  std::size_t replicas = 1;
  std::optional<std::size_t> record_every;  // defaults to max(1, iters / 1000)
  std::string gradient = "stochastic";      // stochastic | exact
  kernels::Backend backend = kernels::Backend::openmp;
};

struct RatesConfig {
  std::size_t iters = 100000;
  std::size_t iters_alpha_half = 1000000;
  double gamma0_alpha_half = 0.1;
  std::size_t replicas = 20;
  double tolerance = 0.3;
};

struct RunConfig {
  ProblemConfig problem;
  ScheduleConfig schedule;
  SolverConfig solver;
  RatesConfig rates;
  std::uint64_t seed = 1;
  std::string trace_file = "trace.csv";
  std::string summary_file = "summary.json";
  boost::property_tree::ptree raw;  // echoed into the summary
};

/// INI text with [problem], [schedule], [solver], [rates], [output] and
/// [run] sections. Every key is optional. Throws ConfigError on unknown
/// sections or keys and on malformed values.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

struct Options {
  std::optional<std::string> config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

int cmd_run(const Options& options, std::ostream& out, std::ostream& err);
int cmd_prox_check(const Options& options, std::ostream& out, std::ostream& err);
int cmd_rates(const Options& options, std::ostream& out, std::ostream& err);

struct RateRow {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma0 = 0.0;
  std::size_t iters = 0;
  double predicted = 0.0;
  double fitted = 0.0;
  bool passed = false;
};

/// Four step regimes on the synthetic problem: alpha = 1/2, and alpha = 1
/// with beta = 2, 1 and 1/2. Slopes of the mean squared relative distance
/// over the last decade.
std::vector<RateRow> rate_table(const RunConfig& config);

/// Entry point used by main(): parses argv and dispatches.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace s3cm::cli
