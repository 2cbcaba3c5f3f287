#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

#include "s3cm/core.hpp"
#include "s3cm/problems.hpp"
#include "s3cm/prox.hpp"

using namespace s3cm;

namespace {

// Gradient 2(x - c) with no enumerable components.
class ShiftedNorm final : public SmoothOracle {
 public:
  explicit ShiftedNorm(Vector c) : c_(std::move(c)) {}
  std::size_t dim() const override { return static_cast<std::size_t>(c_.size()); }
  double value(const Vector& x) const override { return (x - c_).squaredNorm(); }
  void exact_gradient(const Vector& x, Vector& out) const override { out = 2.0 * (x - c_); }
  void stochastic_gradient(const Vector& x, RandomSource&, Vector& out) const override {
    exact_gradient(x, out);
  }

 private:
  Vector c_;
};

}  // namespace

TEST_CASE("random streams are reproducible and distinct") {
  RandomSource a(7, 3), b(7, 3), c(7, 4);
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    const auto x = a.uniform_index(1000);
    CHECK(x == b.uniform_index(1000));
    differs = differs || x != c.uniform_index(1000);
  }
  CHECK(differs);
  CHECK_THROWS_AS(a.uniform_index(0), DomainError);
}

TEST_CASE("uniform_index samples with replacement") {
  RandomSource rng(1, 0);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 3000; ++i) ++counts[rng.uniform_index(3)];
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("finite checks") {
  Vector v = Vector::Ones(5);
  CHECK(all_finite(v));
  v[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(all_finite(v));
  v[3] = -std::numeric_limits<double>::infinity();
  CHECK_FALSE(all_finite(v));
  v[3] = 1e308;
  CHECK(all_finite(v));

  v[2] = std::numeric_limits<double>::infinity();
  try {
    require_finite(v, "prox_f", 17);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.operation() == "prox_f");
    CHECK(e.iteration() == 17);
    CHECK(std::string(e.what()).find("prox_f") != std::string::npos);
  }
}

TEST_CASE("parse errors carry positions") {
  const ParseError e("bad cell", 4, 2);
  CHECK(e.line() == 4);
  CHECK(e.column() == 2);
  CHECK(std::string(e.what()).find("line 4") != std::string::npos);
}

TEST_CASE("problem spec validates dimensions") {
  auto h = std::make_shared<ShiftedNorm>(Vector::Zero(3));
  auto zero = std::make_shared<prox::ZeroTerm>();
  auto half2 = std::make_shared<prox::HalfspaceIndicator>(prox::HalfspaceSet{Vector::Ones(2), 0.0});
  CHECK_NOTHROW(ProblemSpec(h, zero, zero));
  CHECK(ProblemSpec(h, zero, zero).dim == 3);
  CHECK_THROWS_AS(ProblemSpec(h, half2, zero), DomainError);
  CHECK_THROWS_AS(ProblemSpec(nullptr, zero, zero), DomainError);
}

TEST_CASE("fixed-point residual vanishes at the minimiser of an unconstrained quadratic") {
  // h(x) = (1/2)((x1 + 2 x2 - 1)^2 + (3 x1 - x2 - 2)^2); normal equations
  // [10 -1; -1 5] x = [7; 0] give x = (35, 7) / 49.
  RowMatrix a(2, 2);
  a << 1, 2, 3, -1;
  Vector t(2);
  t << 1, 2;
  auto h = std::make_shared<problems::LeastSquaresOracle>(a, t);
  auto zero = std::make_shared<prox::ZeroTerm>();
  ProblemSpec spec(h, zero, zero);
  Vector x_star(2);
  x_star << 35.0 / 49.0, 7.0 / 49.0;

  SolverState s;
  s.x_f = x_star;
  s.x_g = x_star;
  s.u_g = Vector::Zero(2);
  s.gamma = 0.1;
  CHECK(fixed_point_residual(spec, s) <= 1e-10);

  s.x_f[0] += 0.1;
  s.x_g[0] += 0.1;
  CHECK(fixed_point_residual(spec, s) > 1e-3);
}

TEST_CASE("unbiasedness of a finite-sum oracle") {
  RandomSource rng(3, 0);
  RowMatrix a(7, 4);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  Vector t(7);
  for (Eigen::Index i = 0; i < 7; ++i) t[i] = rng.normal();
  problems::LeastSquaresOracle h(a, t);
  for (int k = 0; k < 10; ++k) {
    Vector x(4);
    for (Eigen::Index i = 0; i < 4; ++i) x[i] = rng.normal();
    CHECK(check_unbiasedness(h, x) <= 1e-10);
  }
  ShiftedNorm opaque(Vector::Zero(4));
  CHECK_THROWS_AS(check_unbiasedness(opaque, Vector::Zero(4)), ContractError);
}
