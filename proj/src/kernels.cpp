#include "s3cm/kernels.hpp"

#include <cmath>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace s3cm::kernels {

std::string_view to_string(Backend backend) {
  return backend == Backend::openmp ? "openmp" : "serial";
}

Backend backend_from_string(std::string_view name) {
  if (name == "serial") return Backend::serial;
  if (name == "openmp") return Backend::openmp;
  throw DomainError("unknown backend '" + std::string(name) + "'");
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

double kernel_entry(const RowMatrix& features, const Vector& labels, double sigma, Eigen::Index i,
                    Eigen::Index j) {
  const double dist_sq = (features.row(i) - features.row(j)).squaredNorm();
  return std::exp(-sigma * dist_sq) * labels[i] * labels[j];
}

// Accumulates sum_{i in block} (a_i^T x - t_i) a_i into acc.
void least_squares_block(const RowMatrix& a, const Vector& x, const Vector& targets,
                         Eigen::Index block, Vector& acc) {
  const Eigen::Index begin = block * kRowBlock;
  const Eigen::Index end = std::min<Eigen::Index>(a.rows(), begin + kRowBlock);
  acc.setZero(a.cols());
  for (Eigen::Index i = begin; i < end; ++i) {
    const double residual = a.row(i).dot(x) - targets[i];
    acc.noalias() += residual * a.row(i).transpose();
  }
}

}  // namespace

RowMatrix gaussian_kernel_matrix(const RowMatrix& features, const Vector& labels, double sigma,
                                 Backend backend) {
  const Eigen::Index d = features.rows();
  if (labels.size() != d) throw DomainError("kernel matrix: label count mismatch");
  if (!(sigma > 0.0)) throw DomainError("kernel matrix: sigma must be positive");
  RowMatrix m(d, d);
  if (backend == Backend::openmp) {
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = kernel_entry(features, labels, sigma, i, j);
  } else {
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = kernel_entry(features, labels, sigma, i, j);
  }
  return m;
}

void matvec(const RowMatrix& m, const Vector& x, Vector& out, Backend backend) {
  if (m.cols() != x.size()) throw DomainError("matvec: dimension mismatch");
  out.resize(m.rows());
  const Eigen::Index rows = m.rows();
  if (backend == Backend::openmp) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < rows; ++i) out[i] = m.row(i).dot(x);
  } else {
    for (Eigen::Index i = 0; i < rows; ++i) out[i] = m.row(i).dot(x);
  }
}

void least_squares_gradient(const RowMatrix& a, const Vector& x, const Vector& targets,
                            double scale, Vector& out, Backend backend) {
  if (a.cols() != x.size() || a.rows() != targets.size())
    throw DomainError("least_squares_gradient: dimension mismatch");
  const Eigen::Index blocks = (a.rows() + kRowBlock - 1) / kRowBlock;
  if (blocks <= 1) {
    least_squares_block(a, x, targets, 0, out);
    out *= scale;
    return;
  }
  std::vector<Vector> partial(static_cast<std::size_t>(blocks));
  if (backend == Backend::openmp) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < blocks; ++b)
      least_squares_block(a, x, targets, b, partial[static_cast<std::size_t>(b)]);
  } else {
    for (Eigen::Index b = 0; b < blocks; ++b)
      least_squares_block(a, x, targets, b, partial[static_cast<std::size_t>(b)]);
  }
  out = partial[0];
  for (std::size_t b = 1; b < partial.size(); ++b) out += partial[b];
  out *= scale;
}

}  // namespace s3cm::kernels
