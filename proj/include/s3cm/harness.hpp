#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3cm/core.hpp"
#include "s3cm/kernels.hpp"
#include "s3cm/solvers.hpp"
#include "s3cm/trace.hpp"

namespace s3cm::harness {

// ---------------------------------------------------------------------------
// Reference solutions

struct ReferenceOptions {
  std::size_t iters = 100000;
  /// Constant step of the deterministic run; 1/L when absent.
  std::optional<double> gamma;
};

struct Reference {
  Vector x;
  double residual = 0.0;
};

/// Thrown when the reference run does not settle.
class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Terminal x_g of a constant-step exact-gradient run plus its fixed-point
/// residual. Throws ReferenceError when the residual grows over the last
/// decade of iterations, ContractError without an exact gradient, and
/// DomainError when no step is given and L is unknown.
Reference compute_reference(const ProblemSpec& spec, const ReferenceOptions& options = {});

// ---------------------------------------------------------------------------
// Monte-Carlo

enum class Metric { objective, dist_sq, u_norm };

struct Envelope {
  std::vector<double> mean, min, max;
};

struct McSummary {
  std::vector<std::size_t> n;
  Envelope objective;
  std::optional<Envelope> dist_sq;
  Envelope u_norm;
  std::size_t replicas = 0;
  std::vector<std::uint64_t> stream_ids;
  /// Index and message of every replica that aborted.
  std::vector<std::pair<std::size_t, std::string>> failed;
  /// Per-replica traces in replica order (failed replicas hold empty traces).
  std::vector<Trace> traces;

  const Envelope& envelope(Metric metric) const;
};

using Runner = std::function<Trace(const S3cmConfig&)>;

struct McOptions {
  kernels::Backend backend = kernels::Backend::openmp;
  /// Every replica uses stream `base_seed` (degenerate spread, for tests).
  bool identical_streams = false;
};

/// Runs `replicas` copies of `runner`, replica r on RandomSource(config seed,
/// base_seed + r), and reduces them pointwise in replica order. The result
/// does not depend on the backend or thread count. Failed replicas are
/// reported and excluded from the envelopes.
McSummary monte_carlo(const Runner& runner, const S3cmConfig& config, std::size_t replicas,
                      std::uint64_t base_seed, const McOptions& options = {});

/// Convenience overload running S3CM on `spec`.
McSummary monte_carlo(const ProblemSpec& spec, const S3cmConfig& config, std::size_t replicas,
                      std::uint64_t base_seed, const McOptions& options = {});

// ---------------------------------------------------------------------------
// Metrics and rates

struct RelativeDistance {
  double value = 0.0;
  /// True when the reference was zero and the absolute squared distance was
  /// returned instead.
  bool absolute_fallback = false;
};

/// ||x - ref||^2 / ||ref||^2.
RelativeDistance dist_sq_rel(const Vector& x, const Vector& reference);

/// Ordinary least-squares slope of log(value) against log(n).
/// Throws DomainError for fewer than 2 points or non-positive entries.
double fit_loglog_slope(std::span<const double> n, std::span<const double> values);

struct Window {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// Slope of the mean envelope of `metric` over rows with n in [lo, hi].
/// Default window: the last decade [n_last / 10, n_last]. Throws DomainError
/// with fewer than 10 points or a non-positive value in the window.
double fit_rate(const McSummary& summary, Metric metric,
                std::optional<Window> window = std::nullopt);

/// Same fit on a single trace.
double fit_rate(const Trace& trace, Metric metric, std::optional<Window> window = std::nullopt);

// ---------------------------------------------------------------------------
// Gradient-noise monitor

using GradientSampler =
    std::function<void(const Vector& x, std::size_t n, RandomSource& rng, Vector& out)>;

struct VarianceReport {
  std::vector<std::size_t> n;
  /// Mean of ||r - grad h||^2 over the draws at each sampled iterate.
  std::vector<double> variance;
  /// Trapezoidal estimate of sum_{k <= n} E||r_k - grad h||^2.
  std::vector<double> running_sum;
  /// Fitted exponent t of running_sum ~ n^t over the second half of samples.
  double growth_exponent = 0.0;
  bool superlinear = false;
};

/// Draws `draws` estimates at every iterate stored in trace.iterates and
/// reports the mean squared deviation from the exact gradient. The sampler
/// defaults to the oracle's own stochastic gradient.
VarianceReport variance_monitor(const ProblemSpec& spec, const Trace& trace,
                                std::size_t draws = 100, RandomSource rng = {},
                                GradientSampler sampler = {});

// ---------------------------------------------------------------------------
// Output

nlohmann::json summary_to_json(const McSummary& summary);
void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace s3cm::harness
