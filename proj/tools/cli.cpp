#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "s3cm/harness.hpp"
#include "s3cm/problems.hpp"
#include "s3cm/prox.hpp"
#include "s3cm/schedules.hpp"
#include "s3cm/solvers.hpp"

namespace s3cm::cli {

namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// Config parsing

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem",
       {"kind", "dim", "rows", "condition", "noise", "mu", "seed", "returns", "delimiter",
        "b_return", "test_fraction", "split_seed", "data", "data_dim", "examples", "features", "C",
        "sigma", "reference", "reference_iters"}},
      {"schedule",
       {"kind", "gamma0", "alpha", "eta", "mu_h", "mu_g", "gamma", "lipschitz", "epsilon",
        "alpha_r"}},
      {"solver", {"kind", "iters", "replicas", "record_every", "gradient", "backend"}},
      {"rates", {"iters", "iters_alpha_half", "gamma0_alpha_half", "replicas", "tolerance"}},
      {"output", {"trace", "summary"}},
      {"run", {"seed"}},
  };
  return keys;
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> text(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  std::optional<double> number(const std::string& key) const {
    const auto s = text(key);
    if (!s) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(s->data(), s->data() + s->size(), v);
    if (res.ec != std::errc() || res.ptr != s->data() + s->size() || !std::isfinite(v))
      fail(key, "expected a number, got '" + *s + "'");
    return v;
  }

  std::optional<std::uint64_t> integer(const std::string& key) const {
    const auto v = number(key);
    if (!v) return std::nullopt;
    if (*v < 0 || std::floor(*v) != *v || *v > 9.0e15)
      fail(key, "expected a non-negative integer, got '" + *text(key) + "'");
    return static_cast<std::uint64_t>(*v);
  }

  std::optional<bool> boolean(const std::string& key) const {
    const auto s = text(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1" || *s == "yes") return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    fail(key, "expected true or false, got '" + *s + "'");
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     std::initializer_list<const char*> allowed) const {
    const std::string s = text(key).value_or(fallback);
    for (const char* a : allowed)
      if (s == a) return s;
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    fail(key, "'" + s + "' is not one of " + list);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + message);
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

void require_positive(const Section& s, const std::string& key, double v) {
  if (!(v > 0.0)) s.fail(key, "must be positive");
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  try {
    pt::read_ini(in, cfg.raw);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, section] : cfg.raw) {
    const auto it = known_keys().find(name);
    if (it == known_keys().end()) {
      if (section.empty()) throw ConfigError("key '" + name + "' outside of any section");
      throw ConfigError("unknown section [" + name + "]");
    }
    for (const auto& [key, value] : section)
      if (!it->second.count(key)) throw ConfigError("[" + name + "] unknown key '" + key + "'");
  }
  auto section = [&cfg](const std::string& name) {
    return Section(cfg.raw.get_child_optional(name).get_ptr(), name);
  };

  const Section p = section("problem");
  ProblemConfig& prob = cfg.problem;
  prob.kind = p.choice("kind", prob.kind, {"synthetic", "portfolio", "svm"});
  prob.dim = p.integer("dim").value_or(prob.dim);
  prob.rows = p.integer("rows").value_or(prob.rows);
  prob.condition = p.number("condition").value_or(prob.condition);
  prob.noise = p.number("noise").value_or(prob.noise);
  prob.mu = p.number("mu").value_or(prob.mu);
  prob.problem_seed = p.integer("seed").value_or(prob.problem_seed);
  prob.returns_path = p.text("returns").value_or("");
  if (const auto d = p.text("delimiter")) {
    const std::string v = (*d == "tab" || *d == "\\t") ? "\t" : *d;
    if (v.size() != 1) p.fail("delimiter", "must be a single character or 'tab'");
    prob.delimiter = v[0];
  }
  prob.b_return = p.number("b_return");
  prob.test_fraction = p.number("test_fraction").value_or(prob.test_fraction);
  if (prob.test_fraction < 0.0 || prob.test_fraction >= 1.0)
    p.fail("test_fraction", "must lie in [0, 1)");
  prob.split_seed = p.integer("split_seed").value_or(prob.split_seed);
  prob.data_path = p.text("data").value_or("");
  if (const auto d = p.integer("data_dim")) prob.data_dim = static_cast<std::size_t>(*d);
  prob.examples = p.integer("examples").value_or(prob.examples);
  prob.features = p.integer("features").value_or(prob.features);
  prob.C = p.number("C").value_or(prob.C);
  require_positive(p, "C", prob.C);
  prob.sigma = p.number("sigma").value_or(prob.sigma);
  require_positive(p, "sigma", prob.sigma);
  prob.reference = p.boolean("reference").value_or(prob.reference);
  prob.reference_iters = p.integer("reference_iters").value_or(prob.reference_iters);
  if (prob.kind == "portfolio" && prob.returns_path.empty())
    p.fail("returns", "a portfolio problem needs a returns CSV path");

  const Section s = section("schedule");
  ScheduleConfig& sch = cfg.schedule;
  sch.kind = s.choice("kind", sch.kind, {"polynomial", "recursive", "constant"});
  sch.gamma0 = s.number("gamma0").value_or(sch.gamma0);
  sch.alpha = s.number("alpha").value_or(sch.alpha);
  sch.eta = s.number("eta").value_or(sch.eta);
  sch.mu_h = s.number("mu_h");
  sch.mu_g = s.number("mu_g").value_or(sch.mu_g);
  sch.gamma = s.number("gamma");
  sch.lipschitz = s.number("lipschitz");
  sch.epsilon = s.number("epsilon").value_or(sch.epsilon);
  sch.alpha_r = s.number("alpha_r").value_or(sch.alpha_r);

  const Section v = section("solver");
  SolverConfig& sol = cfg.solver;
  sol.kind = v.choice("kind", sol.kind, {"s3cm", "smcm", "deterministic"});
  sol.iters = v.integer("iters").value_or(sol.iters);
  sol.replicas = v.integer("replicas").value_or(sol.replicas);
  if (sol.replicas == 0) v.fail("replicas", "must be at least 1");
  if (const auto r = v.integer("record_every")) sol.record_every = static_cast<std::size_t>(*r);
  sol.gradient = v.choice("gradient", sol.gradient, {"stochastic", "exact"});
  sol.backend = kernels::backend_from_string(v.choice("backend", "openmp", {"serial", "openmp"}));

  const Section r = section("rates");
  RatesConfig& rates = cfg.rates;
  rates.iters = r.integer("iters").value_or(rates.iters);
  rates.iters_alpha_half = r.integer("iters_alpha_half").value_or(rates.iters_alpha_half);
  rates.gamma0_alpha_half = r.number("gamma0_alpha_half").value_or(rates.gamma0_alpha_half);
  rates.replicas = r.integer("replicas").value_or(rates.replicas);
  rates.tolerance = r.number("tolerance").value_or(rates.tolerance);
  if (rates.iters < 100) r.fail("iters", "must be at least 100");
  if (rates.iters_alpha_half < 100) r.fail("iters_alpha_half", "must be at least 100");
  if (rates.replicas == 0) r.fail("replicas", "must be at least 1");

  const Section o = section("output");
  cfg.trace_file = o.text("trace").value_or(cfg.trace_file);
  cfg.summary_file = o.text("summary").value_or(cfg.summary_file);

  cfg.seed = section("run").integer("seed").value_or(cfg.seed);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Problem and schedule construction

namespace {

struct BuiltProblem {
  ProblemSpec spec;
  std::optional<Vector> reference;
  std::function<double(const Vector&)> objective;
  nlohmann::json descriptor;
};

template <typename F>
auto load_data(const std::string& path, F&& loader) {
  if (!std::filesystem::exists(path)) throw DataError("data file not found: " + path);
  try {
    return loader();
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const DomainError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::optional<Vector> maybe_reference(const ProblemSpec& spec, const ProblemConfig& p) {
  if (!p.reference) return std::nullopt;
  harness::ReferenceOptions options;
  options.iters = p.reference_iters;
  return harness::compute_reference(spec, options).x;
}

BuiltProblem build_problem(const RunConfig& cfg) {
  const ProblemConfig& p = cfg.problem;
  BuiltProblem out;
  if (p.kind == "synthetic") {
    problems::SyntheticOptions options;
    options.mu = p.mu;
    options.noise = p.noise;
    options.reference_iters = p.reference_iters;
    try {
      auto synth = problems::synth_three_composite(p.dim, p.rows, p.problem_seed, p.condition, options);
      out.spec = synth.spec;
      if (p.reference) out.reference = synth.x_ref;
    } catch (const DomainError& e) {
      throw ConfigError(std::string("[problem] ") + e.what());
    }
    out.descriptor = {{"kind", "synthetic"}, {"dim", p.dim},   {"rows", p.rows},
                      {"condition", p.condition}, {"noise", p.noise}, {"mu", p.mu},
                      {"seed", p.problem_seed}};
    return out;
  }

  if (p.kind == "portfolio") {
    const auto returns = load_data(p.returns_path, [&] {
      return problems::load_returns_csv(p.returns_path, p.delimiter);
    });
    problems::ReturnsMatrix train = returns;
    std::optional<problems::ReturnsMatrix> test;
    if (p.test_fraction > 0.0) {
      try {
        auto split = problems::train_test_split(returns, p.test_fraction, p.split_seed);
        train = std::move(split.first);
        test = std::move(split.second);
      } catch (const DomainError& e) {
        throw DataError(p.returns_path + ": " + e.what());
      }
    }
    auto built = problems::build_portfolio_problem(train, p.b_return, cfg.solver.backend);
    out.spec = built.spec;
    if (test) out.objective = problems::portfolio_objective(*test, built.b_return);
    out.reference = maybe_reference(out.spec, p);
    out.descriptor = {{"kind", "portfolio"},         {"returns", p.returns_path},
                      {"days", returns.days()},       {"assets", returns.assets()},
                      {"b_return", built.b_return},  {"test_fraction", p.test_fraction},
                      {"split_seed", p.split_seed}};
    return out;
  }

  problems::ClassificationData data;
  if (!p.data_path.empty())
    data = load_data(p.data_path,
                     [&] { return problems::load_sparse_classification(p.data_path, p.data_dim); });
  else
    data = problems::synth_classification(p.examples, p.features, p.problem_seed);
  try {
    out.spec = problems::build_svm_dual(data.features, data.labels, p.C, p.sigma, cfg.solver.backend)
                   .spec;
  } catch (const DomainError& e) {
    throw DataError((p.data_path.empty() ? std::string("svm") : p.data_path) + ": " + e.what());
  }
  out.reference = maybe_reference(out.spec, p);
  out.descriptor = {{"kind", "svm"},
                    {"data", p.data_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(p.data_path)},
                    {"examples", data.features.size()},
                    {"features", data.dim},
                    {"C", p.C},
                    {"sigma", p.sigma}};
  return out;
}

std::shared_ptr<const Schedule> build_schedule(const ScheduleConfig& s, const SmoothOracle& h) {
  const SmoothConstants constants = h.constants();
  try {
    if (s.kind == "polynomial")
      return std::make_shared<PolynomialSchedule>(s.gamma0, s.alpha,
                                                  s.mu_h ? s.mu_h : constants.strong_convexity);
    if (s.kind == "recursive")
      return std::make_shared<RecursiveSchedule>(s.gamma0, s.eta,
                                                s.mu_h ? s.mu_h : constants.strong_convexity, s.mu_g);
    const std::optional<double> lipschitz = s.lipschitz ? s.lipschitz : constants.lipschitz;
    if (!lipschitz) throw ConfigError("[schedule] constant: the Lipschitz constant is unknown; set 'lipschitz'");
    return std::make_shared<ConstantSchedule>(s.gamma.value_or(1.0 / *lipschitz), *lipschitz,
                                              s.epsilon, s.alpha_r);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[schedule] ") + e.what());
  }
}

nlohmann::json ptree_to_json(const pt::ptree& tree) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, section] : tree) {
    if (section.empty()) {
      j[name] = section.data();
      continue;
    }
    for (const auto& [key, value] : section) j[name][key] = value.data();
  }
  return j;
}

Trace mean_trace(const harness::McSummary& mc) {
  Trace t;
  const Trace* first = nullptr;
  for (const Trace& r : mc.traces)
    if (!r.rows.empty()) {
      first = &r;
      break;
    }
  if (!first) return t;
  for (std::size_t i = 0; i < mc.n.size(); ++i) {
    TraceRow row;
    row.n = mc.n[i];
    row.gamma = first->rows[i].gamma;
    row.objective = mc.objective.mean[i];
    if (mc.dist_sq) row.dist_sq = mc.dist_sq->mean[i];
    row.u_norm = mc.u_norm.mean[i];
    t.rows.push_back(row);
  }
  return t;
}

std::optional<double> try_fit(const harness::McSummary& mc, harness::Metric metric) {
  try {
    return harness::fit_rate(mc, metric);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

// Relative data paths are taken relative to the config file.
std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

RunConfig config_from(const Options& options) {
  RunConfig cfg = options.config_path ? load_config(*options.config_path) : RunConfig{};
  if (options.config_path) {
    const auto base = std::filesystem::path(*options.config_path).parent_path();
    cfg.problem.returns_path = resolve(cfg.problem.returns_path, base);
    cfg.problem.data_path = resolve(cfg.problem.data_path, base);
  }
  if (options.seed) cfg.seed = *options.seed;
  return cfg;
}

nlohmann::json optional_json(std::optional<double> v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

int cmd_run(const Options& options, std::ostream& out, std::ostream& err) {
  if (!options.config_path) throw ConfigError("run needs --config");
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = config_from(options);
  const BuiltProblem problem = build_problem(cfg);
  const auto schedule = build_schedule(cfg.schedule, *problem.spec.h);

  S3cmConfig config;
  config.schedule = schedule;
  config.max_iters = cfg.solver.iters;
  config.rng = RandomSource(cfg.seed, 0);
  config.record_every =
      cfg.solver.record_every.value_or(std::max<std::size_t>(1, cfg.solver.iters / 1000));
  config.gradient_mode =
      cfg.solver.gradient == "exact" ? GradientMode::exact : GradientMode::stochastic;
  config.reference = problem.reference;
  config.relative_distance = problem.reference.has_value() && problem.reference->norm() > 0.0;
  config.objective = problem.objective;
  config.problem_descriptor = problem.descriptor;
  try {
    config.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[solver] ") + e.what());
  }

  harness::Runner runner;
  if (cfg.solver.kind == "s3cm") {
    runner = [&problem](const S3cmConfig& c) { return s3cm_run(problem.spec, c); };
  } else if (cfg.solver.kind == "deterministic") {
    runner = [&problem](const S3cmConfig& c) { return three_operator_splitting_run(problem.spec, c); };
  } else {
    SmcmProblem multi{{problem.spec.g, problem.spec.f}, problem.spec.h};
    runner = [multi](const S3cmConfig& c) { return smcm_run(multi, c); };
  }

  harness::McOptions mc_options;
  mc_options.backend = cfg.solver.backend;
  const harness::McSummary mc =
      harness::monte_carlo(runner, config, cfg.solver.replicas, cfg.seed, mc_options);

  std::filesystem::create_directories(options.out_dir);
  const std::string trace_path = (std::filesystem::path(options.out_dir) / cfg.trace_file).string();
  const std::string summary_path =
      (std::filesystem::path(options.out_dir) / cfg.summary_file).string();
  write_trace_csv(cfg.solver.replicas == 1 ? mc.traces.front() : mean_trace(mc), trace_path);

  nlohmann::json summary = harness::summary_to_json(mc);
  summary["seed"] = cfg.seed;
  summary["solver"] = cfg.solver.kind;
  summary["schedule"] = schedule->describe();
  summary["problem"] = problem.descriptor;
  summary["config"] = ptree_to_json(cfg.raw);
  summary["fitted_slopes"] = {
      {"objective", optional_json(mc.n.empty() ? std::nullopt : try_fit(mc, harness::Metric::objective))},
      {"dist_sq", optional_json(mc.dist_sq ? try_fit(mc, harness::Metric::dist_sq) : std::nullopt)}};
  summary["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  harness::write_json(summary, summary_path);

  if (options.verbose) {
    for (std::size_t r = 0; r < mc.traces.size(); ++r)
      out << "replica " << r << " stream " << mc.stream_ids[r] << ": " << mc.traces[r].wall_seconds
          << " s\n";
  }
  out << "wrote " << trace_path << " and " << summary_path << '\n';
  if (!mc.failed.empty()) {
    for (const auto& [index, message] : mc.failed)
      err << "replica " << index << " aborted: " << message << '\n';
    return kNumericalAbort;
  }
  if (!mc.n.empty()) {
    out << "final objective " << format_double(mc.objective.mean.back());
    if (mc.dist_sq) out << ", relative squared distance " << format_double(mc.dist_sq->mean.back());
    out << '\n';
  }
  return kOk;
}

int cmd_prox_check(const Options& options, std::ostream& out, std::ostream&) {
  prox::CheckOptions check;
  if (options.seed) check.seed = *options.seed;
  const auto results = prox::run_property_checks(check);
  bool all = true;
  out << std::left << std::setw(12) << "projection" << std::setw(20) << "property";
  if (options.verbose) out << std::setw(26) << "max_dev" << std::setw(10) << "tol";
  out << "result\n";
  for (const auto& r : results) {
    all = all && r.passed;
    out << std::left << std::setw(12) << r.projection << std::setw(20) << r.property;
    if (options.verbose)
      out << std::setw(26) << format_double(r.max_deviation) << std::setw(10)
          << format_double(r.tolerance);
    out << (r.passed ? "pass" : "FAIL") << '\n';
    if (!r.passed) {
      out << "  counterexample:";
      for (Eigen::Index i = 0; i < r.counterexample.size(); ++i)
        out << ' ' << format_double(r.counterexample[i]);
      out << '\n';
    }
  }
  return all ? kOk : kCheckFailed;
}

std::vector<RateRow> rate_table(const RunConfig& cfg) {
  const ProblemConfig& p = cfg.problem;
  if (p.kind != "synthetic") throw ConfigError("rates needs [problem] kind = synthetic");
  problems::SyntheticOptions options;
  options.mu = p.mu;
  options.noise = p.noise;
  options.reference_iters = p.reference_iters;
  problems::SyntheticProblem synth;
  try {
    synth = problems::synth_three_composite(p.dim, p.rows, p.problem_seed, p.condition, options);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[problem] ") + e.what());
  }
  const double mu = *synth.oracle->constants().strong_convexity;

  struct Case {
    double alpha, gamma0;
    std::size_t iters;
  };
  const RatesConfig& rc = cfg.rates;
  const std::vector<Case> cases = {{0.5, rc.gamma0_alpha_half, rc.iters_alpha_half},
                                   {1.0, 2.0 / (2.0 * mu), rc.iters},
                                   {1.0, 1.0 / (2.0 * mu), rc.iters},
                                   {1.0, 0.5 / (2.0 * mu), rc.iters}};
  std::vector<RateRow> rows;
  for (const Case& c : cases) {
    auto schedule = std::make_shared<PolynomialSchedule>(c.gamma0, c.alpha, mu);
    S3cmConfig config;
    config.schedule = schedule;
    config.max_iters = c.iters;
    config.rng = RandomSource(cfg.seed, 0);
    config.record_every = std::max<std::size_t>(1, c.iters / 1000);
    config.reference = synth.x_ref;
    config.relative_distance = true;
    const auto mc = harness::monte_carlo(synth.spec, config, rc.replicas, cfg.seed);
    if (!mc.failed.empty()) throw NumericalError(mc.failed.front().second, 0);

    RateRow row;
    row.alpha = c.alpha;
    row.beta = *schedule->beta();
    row.gamma0 = c.gamma0;
    row.iters = c.iters;
    row.predicted = *schedule->predicted_exponent();
    row.fitted = harness::fit_rate(mc, harness::Metric::dist_sq);
    row.passed = std::abs(row.fitted - row.predicted) <= rc.tolerance;
    rows.push_back(row);
  }
  return rows;
}

int cmd_rates(const Options& options, std::ostream& out, std::ostream&) {
  const RunConfig cfg = config_from(options);
  const auto rows = rate_table(cfg);
  out << std::left << std::setw(8) << "alpha" << std::setw(8) << "beta" << std::setw(10)
      << "gamma0" << std::setw(10) << "iters" << std::setw(11) << "predicted" << std::setw(10)
      << "fitted" << "result\n";
  bool all = true;
  for (const RateRow& r : rows) {
    all = all && r.passed;
    out << std::left << std::fixed << std::setprecision(3) << std::setw(8) << r.alpha
        << std::setw(8) << r.beta << std::setw(10) << r.gamma0 << std::setw(10) << r.iters
        << std::setw(11) << r.predicted << std::setw(10) << r.fitted
        << (r.passed ? "pass" : "FAIL") << '\n';
  }
  out.unsetf(std::ios::floatfield);
  return all ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic three-composite minimization experiments", "s3cm"};
  app.require_subcommand(1);
  Options options;
  std::string config_path;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", config_path, "INI experiment config");
    sub->add_option("--out-dir", options.out_dir, "Directory for trace and summary files");
    sub->add_option("--seed", seed, "Seed (overrides [run] seed)");
    sub->add_flag("--verbose", options.verbose, "Print per-check and per-replica details");
  };
  CLI::App* run = app.add_subcommand("run", "Run one experiment from a config");
  CLI::App* check = app.add_subcommand("prox-check", "Property suite for the projections");
  CLI::App* rates = app.add_subcommand("rates", "Fitted vs predicted rates on the synthetic problem");
  add_common(run, true);
  add_common(check, false);
  add_common(rates, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  if (!config_path.empty()) options.config_path = config_path;
  for (CLI::App* sub : {run, check, rates})
    if (sub->count("--seed")) options.seed = seed;

  try {
    if (*run) return cmd_run(options, out, err);
    if (*check) return cmd_prox_check(options, out, err);
    return cmd_rates(options, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const harness::ReferenceError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace s3cm::cli
