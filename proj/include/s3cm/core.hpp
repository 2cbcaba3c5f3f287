#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace s3cm {

/// Dense real coordinate vector. Solver state never holds NaN/Inf.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors

/// Precondition or parameter outside the admissible domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller asked for something the object cannot provide (e.g. an exact
/// gradient from an oracle that has none).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A non-finite value surfaced inside an iteration.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string operation, std::size_t iteration);
  const std::string& operation() const noexcept { return operation_; }
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::string operation_;
  std::size_t iteration_;
};

/// Malformed input file. Line and column are 1-based; 0 means "not known".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// True when no coordinate is infinite or NaN. Vectorises, unlike
/// Eigen's allFinite: 0 * x_i is 0 for finite x_i and NaN otherwise.
inline bool all_finite(const Vector& v) { return std::isfinite((v.array() * 0.0).sum()); }

/// Throws NumericalError unless every coordinate of v is finite.
void require_finite(const Vector& v, const char* operation, std::size_t iteration);

// ---------------------------------------------------------------------------
// Randomness

/// Seeded, splittable random stream. Identical (seed, stream_id) pairs yield
/// identical draw sequences regardless of which thread owns the stream.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform index in [0, n), drawn with replacement.
  std::size_t uniform_index(std::size_t n);
  double uniform(double lo = 0.0, double hi = 1.0);
  double normal();

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Problem terms

/// Known analytic constants of the smooth term. `std::nullopt` means the value
/// is unknown; it is never encoded as 0.
struct SmoothConstants {
  std::optional<double> lipschitz;
  std::optional<double> strong_convexity;
};

/// The smooth term h together with its gradient oracles.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vector& x) const = 0;

  virtual bool has_exact_gradient() const { return true; }
  virtual void exact_gradient(const Vector& x, Vector& out) const = 0;

  /// Unbiased estimate of the gradient at x. Only this call consumes `rng`.
  virtual void stochastic_gradient(const Vector& x, RandomSource& rng, Vector& out) const = 0;

  /// Number of summands for finite-sum oracles whose stochastic estimate is
  /// the gradient of one uniformly drawn component; nullopt otherwise.
  virtual std::optional<std::size_t> num_components() const { return std::nullopt; }

  /// Estimate produced when component `index` is drawn.
  virtual void component_gradient(const Vector& x, std::size_t index, Vector& out) const;

  virtual SmoothConstants constants() const { return {}; }

  Vector exact_gradient(const Vector& x) const;
};

/// A prox-capable term (f or g). Subgradients are never materialised.
class ProxTerm {
 public:
  virtual ~ProxTerm() = default;

  /// out = argmin_z { gamma * term(z) + 0.5 * ||z - x||^2 }.
  virtual void prox(const Vector& x, double gamma, Vector& out) const = 0;

  /// Term value; +inf outside the domain of an indicator.
  virtual double value(const Vector& x) const = 0;

  virtual double strong_convexity() const { return 0.0; }
  virtual bool is_indicator() const { return false; }
  virtual std::string name() const = 0;
  /// Dimension the term is tied to, if any.
  virtual std::optional<std::size_t> fixed_dim() const { return std::nullopt; }

  Vector prox(const Vector& x, double gamma) const;
};

/// minimize f(x) + g(x) + h(x).
struct ProblemSpec {
  std::shared_ptr<const SmoothOracle> h;
  std::shared_ptr<const ProxTerm> f;
  std::shared_ptr<const ProxTerm> g;
  std::size_t dim = 0;

  ProblemSpec() = default;
  ProblemSpec(std::shared_ptr<const SmoothOracle> h, std::shared_ptr<const ProxTerm> f,
              std::shared_ptr<const ProxTerm> g);

  /// Throws DomainError if a term is missing or dimensions disagree.
  void validate() const;
};

/// The S3CM triple plus iteration counter and the step used to produce it.
struct SolverState {
  Vector x_f;
  Vector x_g;
  Vector u_g;
  std::size_t n = 0;
  double gamma = 1.0;
};

/// Distance of `state` from a fixed point of the exact-gradient iteration,
/// measured over one step with step size state.gamma:
///   ||x_g' - x_g|| + ||x_f - x_g'|| + ||x_f' - x_f||.
/// Throws ContractError when h has no exact gradient.
double fixed_point_residual(const ProblemSpec& spec, const SolverState& state);

/// Largest coordinate gap between the average of all component estimates and
/// the exact gradient at `point`. Throws ContractError for oracles that are
/// not enumerable finite sums.
double check_unbiasedness(const SmoothOracle& oracle, const Vector& point);

}  // namespace s3cm
