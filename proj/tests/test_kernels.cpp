#include <doctest.h>

#include <cmath>

#include "s3cm/kernels.hpp"

using namespace s3cm;
using namespace s3cm::kernels;

namespace {

RowMatrix random_rows(RandomSource& rng, Eigen::Index rows, Eigen::Index cols) {
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Vector random_labels(RandomSource& rng, Eigen::Index n) {
  Vector b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return b;
}

}  // namespace

TEST_CASE("backend names") {
  CHECK(backend_from_string("serial") == Backend::serial);
  CHECK(backend_from_string(to_string(Backend::openmp)) == Backend::openmp);
  CHECK_THROWS_AS(backend_from_string("cuda"), DomainError);
  CHECK(max_threads() >= 1);
}

TEST_CASE("serial and OpenMP kernels agree bit for bit") {
  RandomSource rng(21, 0);
  // 700 rows span three row blocks, the last one partial.
  const RowMatrix feats = random_rows(rng, 700, 6);
  const Vector labels = random_labels(rng, 700);
  const RowMatrix ks = gaussian_kernel_matrix(feats, labels, 0.25, Backend::serial);
  const RowMatrix ko = gaussian_kernel_matrix(feats, labels, 0.25, Backend::openmp);
  CHECK(ks == ko);

  const Vector x = random_rows(rng, 700, 1).col(0);
  Vector ms, mo;
  matvec(ks, x, ms, Backend::serial);
  matvec(ks, x, mo, Backend::openmp);
  CHECK(ms == mo);

  const RowMatrix a = random_rows(rng, 900, 40);
  const Vector t = random_rows(rng, 900, 1).col(0);
  const Vector y = random_rows(rng, 40, 1).col(0);
  Vector gs, go;
  least_squares_gradient(a, y, t, 2.0 / 900.0, gs, Backend::serial);
  least_squares_gradient(a, y, t, 2.0 / 900.0, go, Backend::openmp);
  CHECK(gs == go);
}

TEST_CASE("kernel kernels match direct loops") {
  RandomSource rng(4, 0);
  const RowMatrix feats = random_rows(rng, 30, 3);
  const Vector labels = random_labels(rng, 30);
  const RowMatrix k = gaussian_kernel_matrix(feats, labels, 0.5, Backend::openmp);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 30; ++j) {
      double d2 = 0.0;
      for (Eigen::Index c = 0; c < 3; ++c) d2 += std::pow(feats(i, c) - feats(j, c), 2);
      worst = std::max(worst, std::abs(k(i, j) - std::exp(-0.5 * d2) * labels[i] * labels[j]));
    }
  CHECK(worst <= 1e-14);

  const Vector x = random_rows(rng, 30, 1).col(0);
  Vector mx;
  matvec(k, x, mx, Backend::openmp);
  for (Eigen::Index i = 0; i < 30; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < 30; ++j) acc += k(i, j) * x[j];
    CHECK(std::abs(mx[i] - acc) <= 1e-12 * (1.0 + std::abs(acc)));
  }

  const RowMatrix a = random_rows(rng, 12, 4);
  const Vector t = random_rows(rng, 12, 1).col(0);
  const Vector y = random_rows(rng, 4, 1).col(0);
  Vector g;
  least_squares_gradient(a, y, t, 0.5, g, Backend::serial);
  const Vector expect = 0.5 * a.transpose() * (a * y - t);
  CHECK((g - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
}

TEST_CASE("kernel matrix is symmetric, unit diagonal and positive semidefinite") {
  RandomSource rng(9, 0);
  const RowMatrix feats = random_rows(rng, 50, 2);
  const Vector labels = random_labels(rng, 50);
  const RowMatrix k = gaussian_kernel_matrix(feats, labels, 0.25, Backend::openmp);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((k.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-15);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(k), Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
}

TEST_CASE("kernel inputs are validated") {
  const RowMatrix feats = RowMatrix::Zero(3, 2);
  CHECK_THROWS_AS(gaussian_kernel_matrix(feats, Vector::Ones(2), 0.25, Backend::serial), DomainError);
  CHECK_THROWS_AS(gaussian_kernel_matrix(feats, Vector::Ones(3), 0.0, Backend::serial), DomainError);
}
