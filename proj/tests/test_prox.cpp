#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "s3cm/prox.hpp"

using namespace s3cm;
using namespace s3cm::prox;

namespace {

Vector random_vector(RandomSource& rng, Eigen::Index n, double scale) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

// Simplex projection by bisection on the threshold tau with
// sum max(x - tau, 0) = radius; shares nothing with the sort-based code.
Vector simplex_by_bisection(const Vector& x, double radius) {
  double lo = x.minCoeff() - radius, hi = x.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (x.array() - mid).max(0.0).sum();
    (mass > radius ? lo : hi) = mid;
  }
  return (x.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

}  // namespace

TEST_CASE("simplex projection: hand examples") {
  Vector x(3);
  x << 1, 1, 1;
  CHECK((project_simplex(x) - Vector::Constant(3, 1.0 / 3.0)).norm() < 1e-15);
  Vector y(2);
  y << 2, 0;
  CHECK(project_simplex(y).isApprox(Vector::Unit(2, 0)));
  Vector z(3);
  z << 0.2, 0.5, 0.3;
  CHECK((project_simplex(z) - z).norm() < 1e-15);
  CHECK(std::abs(project_simplex(x, 3.0).sum() - 3.0) < 1e-12);
  CHECK_THROWS_AS(project_simplex(x, 0.0), DomainError);
}

TEST_CASE("simplex projection agrees with threshold bisection") {
  RandomSource rng(11, 0);
  for (int k = 0; k < 200; ++k) {
    const Vector x = random_vector(rng, 10, 2.0);
    const double r = 0.5 + rng.uniform(0.0, 2.0);
    CHECK((project_simplex(x, r) - simplex_by_bisection(x, r)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("simplex projection with tied coordinates is deterministic") {
  Vector x(4);
  x << 0.7, 0.7, 0.1, 0.7;
  const Vector p = project_simplex(x);
  CHECK(p == project_simplex(x));
  CHECK(p[0] == p[1]);
  CHECK(p[1] == p[3]);
  CHECK(std::abs(p.sum() - 1.0) < 1e-15);
}

TEST_CASE("box, halfspace and hyperplane closed forms") {
  Vector x(3);
  x << -2, 0.5, 4;
  Vector expect(3);
  expect << -1, 0.5, 1;
  CHECK(project_box(x, -1, 1) == expect);
  CHECK_THROWS_AS(project_box(x, 1, -1), DomainError);

  // {z1 + z2 >= 1} from (0, 0): move by (1/2, 1/2).
  Vector a(2), o(2);
  a << 1, 1;
  o << 0, 0;
  CHECK(project_halfspace(o, a, 1.0).isApprox(Vector::Constant(2, 0.5)));
  CHECK(project_halfspace(Vector::Constant(2, 3.0), a, 1.0) == Vector::Constant(2, 3.0));
  CHECK_THROWS_AS(project_halfspace(o, Vector::Zero(2), 1.0), DomainError);

  // {z1 - z2 = 0} from (1, 3): the midpoint (2, 2).
  Vector n(2), p(2);
  n << 1, -1;
  p << 1, 3;
  CHECK(project_hyperplane(p, n, 0.0).isApprox(Vector::Constant(2, 2.0)));
  CHECK_THROWS_AS(project_hyperplane(p, Vector::Zero(2), 0.0), DomainError);
}

TEST_CASE("projections match the brute-force grid in three dimensions") {
  RandomSource rng(5, 0);
  const GridSpec grid{-1.0, 1.0, 0.02};
  Vector a(3);
  a << 1, 2, -1;
  const HalfspaceIndicator half({a, 0.4});
  const BoxIndicator box({-0.3, 0.6});
  const SimplexIndicator simplex;
  const auto half_value = [&](const Vector& z) { return a.dot(z) >= 0.4 ? 0.0 : kInf; };
  const auto box_value = [&](const Vector& z) { return box.value(z); };
  // The plane sum z = 1 passes through grid points; the band only absorbs
  // rounding in the grid coordinates.
  const auto simplex_value = [&](const Vector& z) {
    return z.minCoeff() >= -1e-9 && std::abs(z.sum() - 1.0) <= 1e-9 ? 0.0 : kInf;
  };
  for (int k = 0; k < 5; ++k) {
    const Vector x = random_vector(rng, 3, 0.4);
    // A generic boundary plane is not lattice aligned, so compare distances:
    // no feasible point beats the projection, and some feasible grid point
    // lies within one grid diagonal of it.
    const Vector bh = brute_force_prox(half_value, x, 1.0, grid);
    const double dist = (half.prox(x, 1.0) - x).norm();
    CHECK((bh - x).norm() >= dist - 1e-12);
    CHECK((bh - x).norm() <= dist + std::sqrt(3.0) * grid.step);
    CHECK((brute_force_prox(box_value, x, 1.0, grid) - box.prox(x, 1.0)).cwiseAbs().maxCoeff() <
          0.011);
    CHECK((brute_force_prox(simplex_value, x, 1.0, grid) - simplex.prox(x, 1.0))
              .cwiseAbs()
              .maxCoeff() < 0.05);
  }
}

TEST_CASE("smooth term proxes match the one-dimensional grid") {
  const GridSpec grid{-3.0, 3.0, 1e-4};
  const SquaredNormTerm sq(2.0);
  const LinearTerm lin(Vector::Constant(1, 0.75));
  for (double x0 : {-2.0, -0.3, 0.0, 1.7}) {
    const Vector x = Vector::Constant(1, x0);
    for (double gamma : {0.1, 1.0, 3.0}) {
      const Vector bf = brute_force_prox([&](const Vector& z) { return sq.value(z); }, x, gamma, grid);
      CHECK(std::abs(bf[0] - sq.prox(x, gamma)[0]) < 1e-4);
      CHECK(std::abs(sq.prox(x, gamma)[0] - x0 / (1.0 + 2.0 * gamma)) < 1e-15);
      if (std::abs(x0 - 0.75 * gamma) > 3.0) continue;
      const Vector bl = brute_force_prox([&](const Vector& z) { return lin.value(z); }, x, gamma, grid);
      CHECK(std::abs(bl[0] - lin.prox(x, gamma)[0]) < 1e-4);
    }
  }
  CHECK_THROWS_AS(SquaredNormTerm(-1.0), DomainError);
}

TEST_CASE("brute-force oracle refuses more than three dimensions") {
  CHECK_THROWS_AS(brute_force_prox([](const Vector&) { return 0.0; }, Vector::Zero(4), 1.0, {}),
                  DomainError);
}

TEST_CASE("indicator prox lands in the set and stays finite for large steps") {
  RandomSource rng(8, 0);
  Vector a = random_vector(rng, 5, 1.0);
  const std::vector<std::shared_ptr<ProxTerm>> terms = {
      std::make_shared<SimplexIndicator>(), std::make_shared<BoxIndicator>(BoxSet{0.0, 2.0}),
      std::make_shared<HalfspaceIndicator>(HalfspaceSet{a, 0.3}),
      std::make_shared<HyperplaneIndicator>(HyperplaneSet{a, -0.2}),
      std::make_shared<SquaredNormTerm>(0.5), std::make_shared<ZeroTerm>(),
      std::make_shared<LinearTerm>(a)};
  for (const auto& t : terms) {
    for (double gamma : {1e-8, 1.0, 1e3, 1e6}) {
      const Vector x = random_vector(rng, 5, 10.0);
      const Vector p = t->prox(x, gamma);
      CHECK(all_finite(p));
      if (t->is_indicator()) CHECK(std::isfinite(t->value(p)));
    }
  }
}

TEST_CASE("property suite covers every projection and passes") {
  const auto results = run_property_checks();
  CHECK(results.size() == 16);
  for (const char* name : {"simplex", "box", "halfspace", "hyperplane"}) {
    for (const char* property :
         {"idempotence", "nonexpansiveness", "obtuse_angle", "oracle_agreement"}) {
      const auto it = std::find_if(results.begin(), results.end(), [&](const CheckResult& r) {
        return r.projection == name && r.property == property;
      });
      REQUIRE(it != results.end());
      CHECK_MESSAGE(it->passed, name, " ", property, " deviation ", it->max_deviation);
      CHECK(it->counterexample.size() == 0);
    }
  }
}
