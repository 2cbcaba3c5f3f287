#include "s3cm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "s3cm/schedules.hpp"

namespace s3cm::harness {

namespace {

class FixedStep final : public Schedule {
 public:
  explicit FixedStep(double gamma) : gamma_(gamma) {}
  double current() const override { return gamma_; }
  double advance() override {
    ++n_;
    return gamma_;
  }
  std::size_t index() const override { return n_; }
  void reset() override { n_ = 0; }
  std::unique_ptr<Schedule> clone() const override { return std::make_unique<FixedStep>(*this); }
  nlohmann::json describe() const override { return {{"kind", kind()}, {"gamma", gamma_}}; }
  std::string kind() const override { return "fixed"; }

 private:
  double gamma_;
  std::size_t n_ = 0;
};

}  // namespace

Reference compute_reference(const ProblemSpec& spec, const ReferenceOptions& options) {
  spec.validate();
  if (!spec.h->has_exact_gradient())
    throw ContractError("compute_reference requires an exact gradient");
  if (options.iters < 10) throw DomainError("compute_reference: need at least 10 iterations");

  double gamma = 0.0;
  if (options.gamma) {
    gamma = *options.gamma;
  } else {
    const auto lip = spec.h->constants().lipschitz;
    if (!lip || !(*lip > 0.0))
      throw DomainError("compute_reference: L unknown; pass an explicit step");
    gamma = 1.0 / *lip;
  }
  if (!(gamma > 0.0)) throw DomainError("compute_reference: step must be positive");

  S3cmConfig config;
  config.schedule = std::make_shared<FixedStep>(gamma);
  config.max_iters = options.iters;
  config.record_every = options.iters / 10;
  config.gradient_mode = GradientMode::exact;
  config.record_states = true;

  const Trace trace = s3cm_run(spec, config);
  // States at n = 0, iters/10, ..., iters (and possibly a trailing row).
  std::vector<double> residuals;
  for (const SolverState& s : trace.states) residuals.push_back(fixed_point_residual(spec, s));
  const double last = residuals.back();
  const double decade_start = residuals.size() >= 2 ? residuals[1] : residuals.front();
  if (!std::isfinite(last) || last > std::max(1e-10, decade_start))
    throw ReferenceError("reference run did not settle: residual " + std::to_string(last) +
                         " after " + std::to_string(options.iters) + " iterations");
  return {trace.final_iterate, last};
}

// ---------------------------------------------------------------------------

const Envelope& McSummary::envelope(Metric metric) const {
  switch (metric) {
    case Metric::objective:
      return objective;
    case Metric::u_norm:
      return u_norm;
    case Metric::dist_sq:
      if (!dist_sq) throw DomainError("summary has no dist_sq (no reference was supplied)");
      return *dist_sq;
  }
  throw DomainError("unknown metric");
}

namespace {

void reduce_into(Envelope& env, std::size_t row, double value, bool first) {
  if (first) {
    env.mean[row] = value;
    env.min[row] = value;
    env.max[row] = value;
  } else {
    env.mean[row] += value;
    env.min[row] = std::min(env.min[row], value);
    env.max[row] = std::max(env.max[row], value);
  }
}

Envelope sized(std::size_t rows) {
  return {std::vector<double>(rows), std::vector<double>(rows), std::vector<double>(rows)};
}

}  // namespace

McSummary monte_carlo(const Runner& runner, const S3cmConfig& config, std::size_t replicas,
                      std::uint64_t base_seed, const McOptions& options) {
  if (replicas == 0) throw DomainError("monte_carlo: need at least one replica");
  config.validate();

  McSummary summary;
  summary.replicas = replicas;
  summary.traces.resize(replicas);
  std::vector<std::string> errors(replicas);
  for (std::size_t r = 0; r < replicas; ++r)
    summary.stream_ids.push_back(options.identical_streams ? base_seed : base_seed + r);

  auto run_one = [&](std::size_t r) {
    S3cmConfig local = config;
    local.rng = RandomSource(config.rng.seed(), summary.stream_ids[r]);
    try {
      summary.traces[r] = runner(local);
    } catch (const std::exception& e) {
      errors[r] = e.what();
      if (errors[r].empty()) errors[r] = "replica aborted";
    }
  };

  const auto count = static_cast<long>(replicas);
  if (options.backend == kernels::Backend::openmp) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long r = 0; r < count; ++r) run_one(static_cast<std::size_t>(r));
  } else {
    for (long r = 0; r < count; ++r) run_one(static_cast<std::size_t>(r));
  }

  // Sequential reduce in replica order.
  const Trace* layout = nullptr;
  for (std::size_t r = 0; r < replicas; ++r) {
    if (!errors[r].empty()) {
      summary.failed.emplace_back(r, errors[r]);
      continue;
    }
    if (!layout) layout = &summary.traces[r];
  }
  if (!layout) return summary;

  const std::size_t rows = layout->rows.size();
  for (const TraceRow& row : layout->rows) summary.n.push_back(row.n);
  summary.objective = sized(rows);
  summary.u_norm = sized(rows);
  const bool has_dist = rows > 0 && layout->rows.front().dist_sq.has_value();
  if (has_dist) summary.dist_sq = sized(rows);

  std::size_t used = 0;
  for (std::size_t r = 0; r < replicas; ++r) {
    if (!errors[r].empty()) continue;
    const Trace& t = summary.traces[r];
    if (t.rows.size() != rows) {
      summary.failed.emplace_back(r, "trace layout differs from replica 0");
      continue;
    }
    const bool first = used == 0;
    for (std::size_t i = 0; i < rows; ++i) {
      reduce_into(summary.objective, i, t.rows[i].objective, first);
      reduce_into(summary.u_norm, i, t.rows[i].u_norm, first);
      if (has_dist) reduce_into(*summary.dist_sq, i, t.rows[i].dist_sq.value_or(0.0), first);
    }
    ++used;
  }
  const double scale = 1.0 / static_cast<double>(used);
  for (double& v : summary.objective.mean) v *= scale;
  for (double& v : summary.u_norm.mean) v *= scale;
  if (has_dist)
    for (double& v : summary.dist_sq->mean) v *= scale;
  // Dividing by the count can push a mean one ulp outside [min, max].
  auto clamp_mean = [](Envelope& e) {
    for (std::size_t i = 0; i < e.mean.size(); ++i)
      e.mean[i] = std::clamp(e.mean[i], e.min[i], e.max[i]);
  };
  clamp_mean(summary.objective);
  clamp_mean(summary.u_norm);
  if (has_dist) clamp_mean(*summary.dist_sq);
  return summary;
}

McSummary monte_carlo(const ProblemSpec& spec, const S3cmConfig& config, std::size_t replicas,
                      std::uint64_t base_seed, const McOptions& options) {
  return monte_carlo([&spec](const S3cmConfig& c) { return s3cm_run(spec, c); }, config, replicas,
                     base_seed, options);
}

// ---------------------------------------------------------------------------

RelativeDistance dist_sq_rel(const Vector& x, const Vector& reference) {
  if (x.size() != reference.size()) throw DomainError("dist_sq_rel: dimension mismatch");
  const double diff = (x - reference).squaredNorm();
  const double ref = reference.squaredNorm();
  if (!(ref > 0.0)) return {diff, true};
  return {diff / ref, false};
}

double fit_loglog_slope(std::span<const double> n, std::span<const double> values) {
  if (n.size() != values.size()) throw DomainError("fit: length mismatch");
  if (n.size() < 2) throw DomainError("fit: need at least two points");
  double mx = 0.0, my = 0.0;
  const auto k = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(values[i] > 0.0))
      throw DomainError("fit: log-log fit needs positive values");
    mx += std::log(n[i]);
    my += std::log(values[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(n[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw DomainError("fit: all n are equal");
  return sxy / sxx;
}

namespace {

double fit_window(const std::vector<std::size_t>& ns, const std::vector<double>& values,
                  std::optional<Window> window) {
  if (ns.empty()) throw DomainError("fit_rate: no recorded rows");
  Window w = window.value_or(Window{ns.back() / 10, ns.back()});
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < w.lo || ns[i] > w.hi || ns[i] == 0) continue;
    if (!(values[i] > 0.0))
      throw DomainError("fit_rate: non-positive metric value at n = " + std::to_string(ns[i]));
    xs.push_back(static_cast<double>(ns[i]));
    ys.push_back(values[i]);
  }
  if (xs.size() < 10) throw DomainError("fit_rate: fewer than 10 points in window");
  return fit_loglog_slope(xs, ys);
}

}  // namespace

double fit_rate(const McSummary& summary, Metric metric, std::optional<Window> window) {
  return fit_window(summary.n, summary.envelope(metric).mean, window);
}

double fit_rate(const Trace& trace, Metric metric, std::optional<Window> window) {
  std::vector<std::size_t> ns;
  std::vector<double> values;
  for (const TraceRow& row : trace.rows) {
    ns.push_back(row.n);
    switch (metric) {
      case Metric::objective:
        values.push_back(row.objective);
        break;
      case Metric::u_norm:
        values.push_back(row.u_norm);
        break;
      case Metric::dist_sq:
        if (!row.dist_sq) throw DomainError("fit_rate: trace has no dist_sq");
        values.push_back(*row.dist_sq);
        break;
    }
  }
  return fit_window(ns, values, window);
}

// ---------------------------------------------------------------------------

VarianceReport variance_monitor(const ProblemSpec& spec, const Trace& trace, std::size_t draws,
                                RandomSource rng, GradientSampler sampler) {
  if (!spec.h->has_exact_gradient())
    throw ContractError("variance_monitor requires an exact gradient");
  if (trace.iterates.size() != trace.rows.size())
    throw DomainError("variance_monitor: trace was recorded without iterates");
  if (draws == 0) throw DomainError("variance_monitor: need at least one draw");
  if (!sampler) {
    const SmoothOracle* h = spec.h.get();
    sampler = [h](const Vector& x, std::size_t, RandomSource& r, Vector& out) {
      h->stochastic_gradient(x, r, out);
    };
  }

  VarianceReport report;
  Vector exact(static_cast<Eigen::Index>(spec.dim));
  Vector sample(static_cast<Eigen::Index>(spec.dim));
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const Vector& x = trace.iterates[i];
    spec.h->exact_gradient(x, exact);
    double acc = 0.0;
    for (std::size_t k = 0; k < draws; ++k) {
      sampler(x, trace.rows[i].n, rng, sample);
      acc += (sample - exact).squaredNorm();
    }
    report.n.push_back(trace.rows[i].n);
    report.variance.push_back(acc / static_cast<double>(draws));
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < report.n.size(); ++i) {
    if (i == 0)
      sum = report.variance[0];
    else
      sum += 0.5 * (report.variance[i] + report.variance[i - 1]) *
             static_cast<double>(report.n[i] - report.n[i - 1]);
    report.running_sum.push_back(sum);
  }

  std::vector<double> xs, ys;
  for (std::size_t i = report.n.size() / 2; i < report.n.size(); ++i) {
    if (report.n[i] == 0 || !(report.running_sum[i] > 0.0)) continue;
    xs.push_back(static_cast<double>(report.n[i]));
    ys.push_back(report.running_sum[i]);
  }
  if (xs.size() >= 2 && xs.front() != xs.back()) {
    report.growth_exponent = fit_loglog_slope(xs, ys);
    report.superlinear = report.growth_exponent > 1.1;
  }
  return report;
}

// ---------------------------------------------------------------------------

nlohmann::json summary_to_json(const McSummary& summary) {
  nlohmann::json j;
  j["replicas"] = summary.replicas;
  j["stream_ids"] = summary.stream_ids;
  nlohmann::json failed = nlohmann::json::array();
  for (const auto& [index, message] : summary.failed)
    failed.push_back({{"replica", index}, {"error", message}});
  j["failed"] = failed;
  if (!summary.n.empty()) {
    const std::size_t last = summary.n.size() - 1;
    j["final"] = {{"n", summary.n[last]},
                  {"objective_mean", summary.objective.mean[last]},
                  {"objective_min", summary.objective.min[last]},
                  {"objective_max", summary.objective.max[last]},
                  {"u_norm_mean", summary.u_norm.mean[last]}};
    if (summary.dist_sq) {
      j["final"]["dist_sq_mean"] = summary.dist_sq->mean[last];
      j["final"]["dist_sq_min"] = summary.dist_sq->min[last];
      j["final"]["dist_sq_max"] = summary.dist_sq->max[last];
    }
  }
  return j;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace s3cm::harness
