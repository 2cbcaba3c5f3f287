#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "s3cm/core.hpp"
#include "s3cm/schedules.hpp"
#include "s3cm/trace.hpp"

namespace s3cm {

enum class GradientMode { stochastic, exact };

struct S3cmConfig {
  /// Prototype; every run works on its own reset clone.
  std::shared_ptr<const Schedule> schedule;
  std::size_t max_iters = 1000;
  RandomSource rng;
  std::size_t record_every = 1;
  GradientMode gradient_mode = GradientMode::stochastic;

  /// When set, rows carry ||x - reference||^2 (divided by ||reference||^2
  /// if `relative_distance`).
  std::optional<Vector> reference;
  bool relative_distance = false;
  /// Objective recorded per row; defaults to h(x).
  std::function<double(const Vector&)> objective;
  bool record_iterates = false;
  bool record_states = false;
  nlohmann::json problem_descriptor = nullptr;

  /// Throws DomainError on an unusable configuration.
  void validate() const;
};

/// Preallocated temporaries for allocation-free steps.
struct StepWorkspace {
  Vector shifted;
  Vector gradient;
  explicit StepWorkspace(Eigen::Index dim = 0) : shifted(dim), gradient(dim) {}
};

/// x_g = prox_{gamma0 g}(x_f0), u_g = (x_f0 - x_g) / gamma0, n = 0.
SolverState s3cm_init(const ProblemSpec& spec, const Vector& x_f0, double gamma0);

/// One main-loop pass:
///   x_g' = prox_{gamma_n g}(x_f + gamma_n u_g)
///   u_g' = (x_f - x_g') / gamma_n + u_g
///   x_f' = prox_{gamma_next f}(x_g' - gamma_next u_g' - gamma_next r)
/// where r is drawn at x_g' (or is the exact gradient there in exact mode,
/// which leaves `rng` untouched).
void s3cm_step(const ProblemSpec& spec, SolverState& state, double gamma_n, double gamma_next,
               RandomSource& rng, GradientMode mode, StepWorkspace& workspace);
SolverState s3cm_step(const ProblemSpec& spec, const SolverState& state, double gamma_n,
                      double gamma_next, RandomSource& rng, GradientMode mode);

/// Runs init plus max_iters steps; the step from n to n+1 uses
/// (gamma_n, gamma_{n+1}) from a one-step lookahead on the schedule.
/// Rows are recorded at n = 0, every record_every steps, and at the end.
/// Default starting point is the zero vector.
Trace s3cm_run(const ProblemSpec& spec, const S3cmConfig& config,
               std::optional<Vector> x_f0 = std::nullopt);

/// Deterministic three-operator splitting in its own (z-variable) form:
///   x_g = prox_{gamma_n g}(z), w = (z - x_g) / gamma_n,
///   x_f = prox_{gamma_next f}(x_g - gamma_next w - gamma_next grad h(x_g)),
///   z = x_f + gamma_next w.
/// Algebraically identical to exact-gradient S3CM; kept as an independent
/// implementation of the baseline. Ignores config.gradient_mode and rng.
Trace three_operator_splitting_run(const ProblemSpec& spec, const S3cmConfig& config,
                                   std::optional<Vector> x_f0 = std::nullopt);

// ---------------------------------------------------------------------------
// Multi-term variant

struct SmcmState {
  std::vector<Vector> x_f;
  std::vector<Vector> u;
  Vector x_bar;
  std::size_t n = 0;
  double gamma = 1.0;
};

struct SmcmProblem {
  std::vector<std::shared_ptr<const ProxTerm>> terms;
  std::shared_ptr<const SmoothOracle> h;
  void validate() const;
};

SmcmState smcm_init(const SmcmProblem& problem, const std::vector<Vector>& x_f0, double gamma0);

/// x_bar' = mean_i(x_fi + gamma_n u_i); u_i' = (x_fi - x_bar') / gamma_n + u_i;
/// x_fi' = prox_{gamma_next m f_i}(x_bar' - gamma_next u_i' - gamma_next r),
/// with one estimate r drawn at x_bar' shared by all terms.
void smcm_step(const SmcmProblem& problem, SmcmState& state, double gamma_n, double gamma_next,
               RandomSource& rng, GradientMode mode);

/// Output iterate is x_bar. Empty `x_f0` means every copy starts at zero.
Trace smcm_run(const SmcmProblem& problem, const S3cmConfig& config,
               const std::vector<Vector>& x_f0 = {});

// ---------------------------------------------------------------------------

struct DualDiagnostic {
  double max_u_norm = 0.0;
  double first_half_max = 0.0;
  double second_half_max = 0.0;
  /// second_half_max / first_half_max (1 when both are zero).
  double growth_ratio = 1.0;
  bool growing = false;
};

/// Running maximum of the recorded dual norms, with a growth flag raised when
/// the second half of the run exceeds the first half by more than 10%.
DualDiagnostic bounded_dual_diagnostic(const Trace& trace);

}  // namespace s3cm
