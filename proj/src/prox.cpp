#include "s3cm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace s3cm::prox {

namespace {

double feasibility_slack(const Vector& x) { return 1e-9 * (1.0 + x.lpNorm<1>()); }

}  // namespace

void project_simplex(const Vector& x, double radius, Vector& out) {
  if (!(radius > 0.0)) throw DomainError("project_simplex: radius must be positive");
  const Eigen::Index d = x.size();
  if (d == 0) throw DomainError("project_simplex: empty vector");

  // Descending order; equal values keep their original index order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&x](Eigen::Index a, Eigen::Index b) { return x[a] > x[b]; });

  double prefix = 0.0;
  double threshold = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double v = x[order[static_cast<std::size_t>(j)]];
    prefix += v;
    const double candidate = (prefix - radius) / static_cast<double>(j + 1);
    if (v - candidate > 0.0) threshold = candidate;
  }
  out = (x.array() - threshold).cwiseMax(0.0).matrix();
}

Vector project_simplex(const Vector& x, double radius) {
  Vector out(x.size());
  project_simplex(x, radius, out);
  return out;
}

void project_box(const Vector& x, double lo, double hi, Vector& out) {
  if (lo > hi) throw DomainError("project_box: lo > hi");
  out = x.cwiseMax(lo).cwiseMin(hi);
}

Vector project_box(const Vector& x, double lo, double hi) {
  Vector out(x.size());
  project_box(x, lo, hi, out);
  return out;
}

void project_halfspace(const Vector& x, const Vector& a, double b, Vector& out) {
  const double nsq = a.squaredNorm();
  if (!(nsq > 0.0)) throw DomainError("project_halfspace: zero normal");
  if (a.size() != x.size()) throw DomainError("project_halfspace: dimension mismatch");
  const double shift = std::max(0.0, (b - a.dot(x)) / nsq);
  if (&out != &x) out = x;
  if (shift > 0.0) out += shift * a;
}

Vector project_halfspace(const Vector& x, const Vector& a, double b) {
  Vector out(x.size());
  project_halfspace(x, a, b, out);
  return out;
}

void project_hyperplane(const Vector& x, const Vector& normal, double c, Vector& out) {
  const double nsq = normal.squaredNorm();
  if (!(nsq > 0.0)) throw DomainError("project_hyperplane: zero normal");
  if (normal.size() != x.size()) throw DomainError("project_hyperplane: dimension mismatch");
  const double shift = (normal.dot(x) - c) / nsq;
  if (&out != &x) out = x;
  out -= shift * normal;
}

Vector project_hyperplane(const Vector& x, const Vector& normal, double c) {
  Vector out(x.size());
  project_hyperplane(x, normal, c, out);
  return out;
}

// ---------------------------------------------------------------------------

void ZeroTerm::prox(const Vector& x, double, Vector& out) const { out = x; }

void LinearTerm::prox(const Vector& x, double gamma, Vector& out) const {
  out = x - gamma * c_;
}

SquaredNormTerm::SquaredNormTerm(double mu) : mu_(mu) {
  if (!(mu >= 0.0)) throw DomainError("SquaredNormTerm: mu must be nonnegative");
}

void SquaredNormTerm::prox(const Vector& x, double gamma, Vector& out) const {
  out = x / (1.0 + gamma * mu_);
}

SimplexIndicator::SimplexIndicator(SimplexSet set) : set_(set) {
  if (!(set_.radius > 0.0)) throw DomainError("simplex radius must be positive");
}

void SimplexIndicator::prox(const Vector& x, double, Vector& out) const {
  project_simplex(x, set_.radius, out);
}

double SimplexIndicator::value(const Vector& x) const {
  const double slack = feasibility_slack(x);
  if (x.minCoeff() < -slack) return kInf;
  return std::abs(x.sum() - set_.radius) <= slack ? 0.0 : kInf;
}

BoxIndicator::BoxIndicator(BoxSet set) : set_(set) {
  if (set_.lo > set_.hi) throw DomainError("box: lo > hi");
}

void BoxIndicator::prox(const Vector& x, double, Vector& out) const {
  project_box(x, set_.lo, set_.hi, out);
}

double BoxIndicator::value(const Vector& x) const {
  const double slack = 1e-12 * (1.0 + std::max(std::abs(set_.lo), std::abs(set_.hi)));
  return (x.minCoeff() >= set_.lo - slack && x.maxCoeff() <= set_.hi + slack) ? 0.0 : kInf;
}

HalfspaceIndicator::HalfspaceIndicator(HalfspaceSet set)
    : set_(std::move(set)), normal_norm_(set_.normal.norm()) {
  if (!(normal_norm_ > 0.0)) throw DomainError("halfspace: zero normal");
}

void HalfspaceIndicator::prox(const Vector& x, double, Vector& out) const {
  project_halfspace(x, set_.normal, set_.offset, out);
}

double HalfspaceIndicator::value(const Vector& x) const {
  const double slack = 1e-12 * normal_norm_ * (1.0 + x.norm());
  return set_.normal.dot(x) >= set_.offset - slack ? 0.0 : kInf;
}

HyperplaneIndicator::HyperplaneIndicator(HyperplaneSet set)
    : set_(std::move(set)), normal_norm_(set_.normal.norm()) {
  if (!(normal_norm_ > 0.0)) throw DomainError("hyperplane: zero normal");
}

void HyperplaneIndicator::prox(const Vector& x, double, Vector& out) const {
  const double shift = (set_.normal.dot(x) - set_.offset) / (normal_norm_ * normal_norm_);
  out = x - shift * set_.normal;
}

double HyperplaneIndicator::value(const Vector& x) const {
  const double slack = 1e-12 * normal_norm_ * (1.0 + x.norm());
  return std::abs(set_.normal.dot(x) - set_.offset) <= slack ? 0.0 : kInf;
}

// ---------------------------------------------------------------------------

Vector brute_force_prox(const ValueFn& value_fn, const Vector& x, double gamma,
                        const GridSpec& grid) {
  const Eigen::Index d = x.size();
  if (d < 1 || d > 3) throw DomainError("brute_force_prox: only 1 <= dim <= 3 is supported");
  if (!(gamma > 0.0)) throw DomainError("brute_force_prox: gamma must be positive");
  if (!(grid.step > 0.0) || !(grid.hi >= grid.lo)) throw DomainError("brute_force_prox: bad grid");

  const auto points = static_cast<long>(std::floor((grid.hi - grid.lo) / grid.step + 0.5)) + 1;
  long total = 1;
  for (Eigen::Index k = 0; k < d; ++k) total *= points;

  Vector z(d);
  Vector best = Vector::Constant(d, grid.lo);
  double best_value = kInf;
  for (long flat = 0; flat < total; ++flat) {
    long rest = flat;
    for (Eigen::Index k = 0; k < d; ++k) {
      z[k] = grid.lo + static_cast<double>(rest % points) * grid.step;
      rest /= points;
    }
    const double term = value_fn(z);
    if (!std::isfinite(term)) continue;
    const double objective = gamma * term + 0.5 * (z - x).squaredNorm();
    if (objective < best_value) {
      best_value = objective;
      best = z;
    }
  }
  if (!std::isfinite(best_value))
    throw DomainError("brute_force_prox: no grid point has a finite value");
  return best;
}

}  // namespace s3cm::prox
