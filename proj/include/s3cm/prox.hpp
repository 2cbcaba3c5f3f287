#pragma once

#include <functional>
#include <string>
#include <vector>

#include "s3cm/core.hpp"

namespace s3cm::prox {

// Closed-form Euclidean projections. All are pure functions.

/// Projection onto {z >= 0, sum z = radius} (sort-and-threshold).
Vector project_simplex(const Vector& x, double radius = 1.0);
void project_simplex(const Vector& x, double radius, Vector& out);

/// Coordinatewise clamp to [lo, hi].
Vector project_box(const Vector& x, double lo, double hi);
void project_box(const Vector& x, double lo, double hi, Vector& out);

/// Projection onto {z : a^T z >= b}.
Vector project_halfspace(const Vector& x, const Vector& a, double b);
void project_halfspace(const Vector& x, const Vector& a, double b, Vector& out);

/// Projection onto {z : n^T z = c}.
Vector project_hyperplane(const Vector& x, const Vector& normal, double c);
void project_hyperplane(const Vector& x, const Vector& normal, double c, Vector& out);

// ---------------------------------------------------------------------------
// Terms

class ZeroTerm final : public ProxTerm {
 public:
  using ProxTerm::prox;
  void prox(const Vector& x, double gamma, Vector& out) const override;
  double value(const Vector&) const override { return 0.0; }
  std::string name() const override { return "zero"; }
};

/// c^T x. Its prox is a shift by -gamma * c.
class LinearTerm final : public ProxTerm {
 public:
  explicit LinearTerm(Vector c) : c_(std::move(c)) {}
  using ProxTerm::prox;
  void prox(const Vector& x, double gamma, Vector& out) const override;
  double value(const Vector& x) const override { return c_.dot(x); }
  std::string name() const override { return "linear"; }
  std::optional<std::size_t> fixed_dim() const override { return static_cast<std::size_t>(c_.size()); }

 private:
  Vector c_;
};

/// (mu / 2) ||x||^2, a mu-strongly convex term.
class SquaredNormTerm final : public ProxTerm {
 public:
  explicit SquaredNormTerm(double mu);
  using ProxTerm::prox;
  void prox(const Vector& x, double gamma, Vector& out) const override;
  double value(const Vector& x) const override { return 0.5 * mu_ * x.squaredNorm(); }
  double strong_convexity() const override { return mu_; }
  std::string name() const override { return "squared_norm"; }

 private:
  double mu_;
};

struct SimplexSet {
  double radius = 1.0;
};

struct BoxSet {
  double lo = 0.0;
  double hi = 1.0;
};

/// a^T x >= b
struct HalfspaceSet {
  Vector normal;
  double offset = 0.0;
};

/// n^T x = c
struct HyperplaneSet {
  Vector normal;
  double offset = 0.0;
};

/// Indicator terms. `value` returns 0 inside the set (up to a relative
/// feasibility tolerance) and +inf outside.
class SimplexIndicator final : public ProxTerm {
 public:
  explicit SimplexIndicator(SimplexSet set = {});
  using ProxTerm::prox;
  void prox(const Vector& x, double gamma, Vector& out) const override;
  double value(const Vector& x) const override;
  bool is_indicator() const override { return true; }
  std::string name() const override { return "simplex"; }
  const SimplexSet& set() const { return set_; }

 private:
  SimplexSet set_;
};

class BoxIndicator final : public ProxTerm {
 public:
  explicit BoxIndicator(BoxSet set = {});
  using ProxTerm::prox;
  void prox(const Vector& x, double gamma, Vector& out) const override;
  double value(const Vector& x) const override;
  bool is_indicator() const override { return true; }
  std::string name() const override { return "box"; }
  const BoxSet& set() const { return set_; }

 private:
  BoxSet set_;
};

class HalfspaceIndicator final : public ProxTerm {
 public:
  explicit HalfspaceIndicator(HalfspaceSet set);
  using ProxTerm::prox;
  void prox(const Vector& x, double gamma, Vector& out) const override;
  double value(const Vector& x) const override;
  bool is_indicator() const override { return true; }
  std::string name() const override { return "halfspace"; }
  std::optional<std::size_t> fixed_dim() const override { return static_cast<std::size_t>(set_.normal.size()); }
  const HalfspaceSet& set() const { return set_; }

 private:
  HalfspaceSet set_;
  double normal_norm_;
};

class HyperplaneIndicator final : public ProxTerm {
 public:
  explicit HyperplaneIndicator(HyperplaneSet set);
  using ProxTerm::prox;
  void prox(const Vector& x, double gamma, Vector& out) const override;
  double value(const Vector& x) const override;
  bool is_indicator() const override { return true; }
  std::string name() const override { return "hyperplane"; }
  std::optional<std::size_t> fixed_dim() const override { return static_cast<std::size_t>(set_.normal.size()); }
  const HyperplaneSet& set() const { return set_; }

 private:
  HyperplaneSet set_;
  double normal_norm_;
};

// ---------------------------------------------------------------------------
// Brute-force oracle

/// Axis-aligned grid [lo, hi]^dim with spacing `step`.
struct GridSpec {
  double lo = -2.0;
  double hi = 2.0;
  double step = 1e-3;
};

using ValueFn = std::function<double(const Vector&)>;

/// Grid point minimising gamma * value_fn(z) + 0.5 * ||z - x||^2.
/// Supports dim <= 3 only.
Vector brute_force_prox(const ValueFn& value_fn, const Vector& x, double gamma,
                        const GridSpec& grid);

// ---------------------------------------------------------------------------
// Property suite shared by the CLI and the tests

struct CheckResult {
  std::string projection;
  std::string property;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  Vector counterexample;  // empty when passed
};

struct CheckOptions {
  std::size_t samples = 1000;
  std::size_t feasible_samples = 100;
  std::size_t oracle_samples = 8;
  std::uint64_t seed = 20160901;
};

/// Runs idempotence, nonexpansiveness, obtuse-angle and grid-oracle agreement
/// for the simplex, box, halfspace and hyperplane projections.
std::vector<CheckResult> run_property_checks(const CheckOptions& options = {});

}  // namespace s3cm::prox
