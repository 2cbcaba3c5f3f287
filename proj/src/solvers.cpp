#include "s3cm/solvers.hpp"

#include <chrono>
#include <cmath>

namespace s3cm {

void S3cmConfig::validate() const {
  if (!schedule) throw DomainError("solver config: schedule is required");
  if (record_every == 0) throw DomainError("solver config: record_every must be positive");
  if (max_iters > 0 && record_every > max_iters)
    throw DomainError("solver config: record_every must not exceed max_iters");
  if (reference && relative_distance && !(reference->norm() > 0.0))
    throw DomainError("solver config: relative distance needs a nonzero reference");
}

namespace {

// Shared row bookkeeping for all three runners.
class Recorder {
 public:
  Recorder(const S3cmConfig& config, const SmoothOracle& h) : config_(config), h_(h) {
    if (config_.reference && config_.relative_distance)
      reference_sq_ = config_.reference->squaredNorm();
    trace_.meta = {{"seed", config.rng.seed()},
                   {"stream_id", config.rng.stream_id()},
                   {"schedule", config.schedule->describe()},
                   {"problem", config.problem_descriptor},
                   {"max_iters", config.max_iters},
                   {"record_every", config.record_every},
                   {"gradient_mode",
                    config.gradient_mode == GradientMode::exact ? "exact" : "stochastic"}};
  }

  bool due(std::size_t n) const {
    return n == 0 || n % config_.record_every == 0 || n == config_.max_iters;
  }

  void record(std::size_t n, double gamma, const Vector& iterate, double u_norm,
              const SolverState* state = nullptr) {
    TraceRow row;
    row.n = n;
    row.gamma = gamma;
    row.objective = config_.objective ? config_.objective(iterate) : h_.value(iterate);
    if (config_.reference) row.dist_sq = (iterate - *config_.reference).squaredNorm() / reference_sq_;
    row.u_norm = u_norm;
    trace_.rows.push_back(row);
    if (config_.record_iterates) trace_.iterates.push_back(iterate);
    if (config_.record_states && state) trace_.states.push_back(*state);
  }

  Trace finish(const Vector& iterate, double seconds) {
    trace_.final_iterate = iterate;
    trace_.wall_seconds = seconds;
    trace_.meta["wall_seconds"] = seconds;
    return std::move(trace_);
  }

 private:
  const S3cmConfig& config_;
  const SmoothOracle& h_;
  double reference_sq_ = 1.0;
  Trace trace_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vector start_point(const ProblemSpec& spec, const std::optional<Vector>& x_f0) {
  if (!x_f0) return Vector::Zero(static_cast<Eigen::Index>(spec.dim));
  if (static_cast<std::size_t>(x_f0->size()) != spec.dim)
    throw DomainError("starting point dimension mismatch");
  return *x_f0;
}

}  // namespace

SolverState s3cm_init(const ProblemSpec& spec, const Vector& x_f0, double gamma0) {
  spec.validate();
  if (static_cast<std::size_t>(x_f0.size()) != spec.dim)
    throw DomainError("s3cm_init: starting point dimension mismatch");
  if (!(gamma0 > 0.0)) throw DomainError("s3cm_init: gamma0 must be positive");
  require_finite(x_f0, "s3cm_init input", 0);
  SolverState state;
  state.x_f = x_f0;
  spec.g->prox(x_f0, gamma0, state.x_g);
  state.u_g = (x_f0 - state.x_g) / gamma0;
  state.n = 0;
  state.gamma = gamma0;
  require_finite(state.x_g, "s3cm_init prox_g", 0);
  require_finite(state.u_g, "s3cm_init dual", 0);
  return state;
}

void s3cm_step(const ProblemSpec& spec, SolverState& state, double gamma_n, double gamma_next,
               RandomSource& rng, GradientMode mode, StepWorkspace& ws) {
  const std::size_t next = state.n + 1;
  ws.shifted = state.x_f + gamma_n * state.u_g;
  spec.g->prox(ws.shifted, gamma_n, state.x_g);
  state.u_g += (state.x_f - state.x_g) / gamma_n;

  if (mode == GradientMode::exact)
    spec.h->exact_gradient(state.x_g, ws.gradient);
  else
    spec.h->stochastic_gradient(state.x_g, rng, ws.gradient);

  ws.shifted = state.x_g - gamma_next * state.u_g - gamma_next * ws.gradient;
  spec.f->prox(ws.shifted, gamma_next, state.x_f);

  // A non-finite stage shows up in x_f, u_g or the gradient; only on failure look back
  // for the first stage that produced them.
  if (!all_finite(state.x_f) || !all_finite(state.u_g) || !all_finite(ws.gradient)) {
    require_finite(state.x_g, "prox_g", next);
    require_finite(state.u_g, "dual update", next);
    require_finite(ws.gradient, "gradient estimate", next);
    require_finite(state.x_f, "prox_f", next);
  }

  state.n = next;
  state.gamma = gamma_next;
}

SolverState s3cm_step(const ProblemSpec& spec, const SolverState& state, double gamma_n,
                      double gamma_next, RandomSource& rng, GradientMode mode) {
  SolverState out = state;
  StepWorkspace ws(static_cast<Eigen::Index>(spec.dim));
  s3cm_step(spec, out, gamma_n, gamma_next, rng, mode, ws);
  return out;
}

Trace s3cm_run(const ProblemSpec& spec, const S3cmConfig& config, std::optional<Vector> x_f0) {
  spec.validate();
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto schedule = config.schedule->clone();
  schedule->reset();
  RandomSource rng = config.rng;
  Recorder recorder(config, *spec.h);

  SolverState state = s3cm_init(spec, start_point(spec, x_f0), schedule->current());
  recorder.record(0, state.gamma, state.x_g, state.u_g.norm(), &state);

  StepWorkspace ws(static_cast<Eigen::Index>(spec.dim));
  for (std::size_t k = 0; k < config.max_iters; ++k) {
    const double gamma_n = schedule->current();
    const double gamma_next = schedule->advance();
    s3cm_step(spec, state, gamma_n, gamma_next, rng, config.gradient_mode, ws);
    if (recorder.due(state.n)) recorder.record(state.n, state.gamma, state.x_g, state.u_g.norm(), &state);
  }
  return recorder.finish(state.x_g, seconds_since(start));
}

Trace three_operator_splitting_run(const ProblemSpec& spec, const S3cmConfig& config,
                                   std::optional<Vector> x_f0) {
  spec.validate();
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto schedule = config.schedule->clone();
  schedule->reset();
  S3cmConfig exact = config;
  exact.gradient_mode = GradientMode::exact;
  Recorder recorder(exact, *spec.h);

  const Vector x0 = start_point(spec, x_f0);
  const double gamma0 = schedule->current();
  Vector x_g = spec.g->prox(x0, gamma0);
  Vector w = (x0 - x_g) / gamma0;
  Vector z = x0 + gamma0 * w;
  Vector x_f = x0;
  Vector grad(x0.size());
  Vector arg(x0.size());
  recorder.record(0, gamma0, x_g, w.norm());

  for (std::size_t k = 0; k < config.max_iters; ++k) {
    const double gamma_n = schedule->current();
    const double gamma_next = schedule->advance();
    spec.g->prox(z, gamma_n, x_g);
    w = (z - x_g) / gamma_n;
    spec.h->exact_gradient(x_g, grad);
    arg = x_g - gamma_next * w - gamma_next * grad;
    spec.f->prox(arg, gamma_next, x_f);
    z = x_f + gamma_next * w;
    require_finite(z, "three-operator splitting", k + 1);
    if (recorder.due(k + 1)) recorder.record(k + 1, gamma_next, x_g, w.norm());
  }
  return recorder.finish(x_g, seconds_since(start));
}

// ---------------------------------------------------------------------------

void SmcmProblem::validate() const {
  if (!h) throw DomainError("smcm: smooth term is required");
  if (terms.empty()) throw DomainError("smcm: need at least one prox term");
  for (const auto& t : terms)
    if (!t) throw DomainError("smcm: null prox term");
}

SmcmState smcm_init(const SmcmProblem& problem, const std::vector<Vector>& x_f0, double gamma0) {
  problem.validate();
  if (!(gamma0 > 0.0)) throw DomainError("smcm_init: gamma0 must be positive");
  const std::size_t m = problem.terms.size();
  const auto d = static_cast<Eigen::Index>(problem.h->dim());
  SmcmState state;
  if (x_f0.empty()) {
    state.x_f.assign(m, Vector::Zero(d));
  } else {
    if (x_f0.size() != m) throw DomainError("smcm_init: need one starting point per term");
    for (const Vector& v : x_f0) {
      if (v.size() != d) throw DomainError("smcm_init: starting point dimension mismatch");
      require_finite(v, "smcm_init input", 0);
    }
    state.x_f = x_f0;
  }
  state.x_bar = Vector::Zero(d);
  for (const Vector& v : state.x_f) state.x_bar += v;
  state.x_bar /= static_cast<double>(m);
  for (const Vector& v : state.x_f) state.u.push_back((v - state.x_bar) / gamma0);
  state.n = 0;
  state.gamma = gamma0;
  return state;
}

void smcm_step(const SmcmProblem& problem, SmcmState& state, double gamma_n, double gamma_next,
               RandomSource& rng, GradientMode mode) {
  const std::size_t m = problem.terms.size();
  const std::size_t next = state.n + 1;
  const double scale = static_cast<double>(m);

  state.x_bar.setZero();
  for (std::size_t i = 0; i < m; ++i) state.x_bar += state.x_f[i] + gamma_n * state.u[i];
  state.x_bar /= scale;
  require_finite(state.x_bar, "averaging", next);

  Vector r(state.x_bar.size());
  if (mode == GradientMode::exact)
    problem.h->exact_gradient(state.x_bar, r);
  else
    problem.h->stochastic_gradient(state.x_bar, rng, r);
  require_finite(r, "gradient estimate", next);

  Vector arg(state.x_bar.size());
  for (std::size_t i = 0; i < m; ++i) {
    state.u[i] += (state.x_f[i] - state.x_bar) / gamma_n;
    arg = state.x_bar - gamma_next * state.u[i] - gamma_next * r;
    problem.terms[i]->prox(arg, gamma_next * scale, state.x_f[i]);
    require_finite(state.x_f[i], "prox_f_i", next);
  }
  state.n = next;
  state.gamma = gamma_next;
}

Trace smcm_run(const SmcmProblem& problem, const S3cmConfig& config,
               const std::vector<Vector>& x_f0) {
  problem.validate();
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto schedule = config.schedule->clone();
  schedule->reset();
  RandomSource rng = config.rng;
  Recorder recorder(config, *problem.h);

  auto dual_norm = [](const SmcmState& s) {
    double sq = 0.0;
    for (const Vector& u : s.u) sq += u.squaredNorm();
    return std::sqrt(sq);
  };

  SmcmState state = smcm_init(problem, x_f0, schedule->current());
  recorder.record(0, state.gamma, state.x_bar, dual_norm(state));
  for (std::size_t k = 0; k < config.max_iters; ++k) {
    const double gamma_n = schedule->current();
    const double gamma_next = schedule->advance();
    smcm_step(problem, state, gamma_n, gamma_next, rng, config.gradient_mode);
    if (recorder.due(state.n)) recorder.record(state.n, state.gamma, state.x_bar, dual_norm(state));
  }
  return recorder.finish(state.x_bar, seconds_since(start));
}

// ---------------------------------------------------------------------------

DualDiagnostic bounded_dual_diagnostic(const Trace& trace) {
  DualDiagnostic out;
  const std::size_t count = trace.rows.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double u = trace.rows[i].u_norm;
    out.max_u_norm = std::max(out.max_u_norm, u);
    if (2 * i < count)
      out.first_half_max = std::max(out.first_half_max, u);
    else
      out.second_half_max = std::max(out.second_half_max, u);
  }
  if (out.first_half_max > 0.0)
    out.growth_ratio = out.second_half_max / out.first_half_max;
  else if (out.second_half_max > 0.0)
    out.growth_ratio = kInf;
  out.growing = out.growth_ratio > 1.1;
  return out;
}

}  // namespace s3cm
