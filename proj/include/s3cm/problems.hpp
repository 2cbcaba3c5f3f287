#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "s3cm/core.hpp"
#include "s3cm/kernels.hpp"

namespace s3cm::problems {

// ---------------------------------------------------------------------------
// Returns data

/// Days x assets matrix of returns with its column means.
struct ReturnsMatrix {
  RowMatrix values;
  Vector a_av;

  static ReturnsMatrix from_values(RowMatrix values);
  std::size_t days() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t assets() const { return static_cast<std::size_t>(values.cols()); }
};

/// Parsed CSV before imputation. Missing cells (empty or "NaN") hold NaN.
struct ReturnsTable {
  RowMatrix values;
  std::vector<std::string> header;  // empty when the file has none
  std::size_t missing = 0;
};

/// Rectangular numeric CSV; a first row with any non-numeric cell is taken as
/// a header. Throws ParseError (1-based line/column) on ragged rows,
/// non-numeric cells or an empty file.
ReturnsTable read_returns_csv(std::istream& in, char delimiter = ',');
ReturnsTable read_returns_csv(const std::string& path, char delimiter = ',');

/// Reads and, when cells are missing, imputes them.
ReturnsMatrix load_returns_csv(const std::string& path, char delimiter = ',');

/// Fills each missing cell from the nearest complete row, distance measured
/// over the coordinates observed in the incomplete row; ties go to the lower
/// row index. Throws DomainError when no row is complete.
ReturnsMatrix impute_nearest_neighbor(const RowMatrix& values_with_nan);

/// Canonical serialisation: no header, shortest round-trip decimals.
void write_returns_csv(const ReturnsMatrix& returns, std::ostream& out, char delimiter = ',');

/// Random disjoint row partition; the test part has round(fraction * days)
/// rows. Throws DomainError when either part would be empty.
std::pair<ReturnsMatrix, ReturnsMatrix> train_test_split(const ReturnsMatrix& returns,
                                                         double test_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Smooth terms

/// h(x) = (1/p) sum_i (a_i^T x - t_i)^2 with single-row gradient estimates
/// 2 (a_i^T x - t_i) a_i.
class LeastSquaresOracle final : public SmoothOracle {
 public:
  LeastSquaresOracle(RowMatrix rows, Vector targets,
                     kernels::Backend backend = kernels::Backend::serial);

  std::size_t dim() const override { return static_cast<std::size_t>(rows_.cols()); }
  double value(const Vector& x) const override;
  using SmoothOracle::exact_gradient;
  void exact_gradient(const Vector& x, Vector& out) const override;
  void stochastic_gradient(const Vector& x, RandomSource& rng, Vector& out) const override;
  std::optional<std::size_t> num_components() const override {
    return static_cast<std::size_t>(rows_.rows());
  }
  void component_gradient(const Vector& x, std::size_t index, Vector& out) const override;
  SmoothConstants constants() const override { return constants_; }

  const RowMatrix& rows() const { return rows_; }
  const Vector& targets() const { return targets_; }
  /// Eigenvalues of the Hessian (2/p) A^T A, ascending.
  const Vector& hessian_eigenvalues() const { return eigenvalues_; }

 private:
  RowMatrix rows_;
  Vector targets_;
  kernels::Backend backend_;
  Vector eigenvalues_;
  SmoothConstants constants_;
};

/// h(x) = 0.5 x^T M x - sum_i x_i with column-sampled estimates
/// d * M[:, i] * x_i - 1. Counts kernel columns read by each path.
class SvmDualOracle final : public SmoothOracle {
 public:
  SvmDualOracle(RowMatrix kernel, kernels::Backend backend = kernels::Backend::serial,
                bool compute_constants = true);

  std::size_t dim() const override { return static_cast<std::size_t>(kernel_.rows()); }
  double value(const Vector& x) const override;
  using SmoothOracle::exact_gradient;
  void exact_gradient(const Vector& x, Vector& out) const override;
  void stochastic_gradient(const Vector& x, RandomSource& rng, Vector& out) const override;
  std::optional<std::size_t> num_components() const override { return dim(); }
  void component_gradient(const Vector& x, std::size_t index, Vector& out) const override;
  SmoothConstants constants() const override { return constants_; }

  const RowMatrix& kernel() const { return kernel_; }

  struct Counters {
    std::uint64_t columns_touched = 0;
    std::uint64_t multiplications = 0;
  };
  Counters counters() const;
  void reset_counters() const;

 private:
  void count(std::uint64_t columns) const;

  RowMatrix kernel_;
  kernels::Backend backend_;
  SmoothConstants constants_;
  mutable std::atomic<std::uint64_t> columns_touched_{0};
  mutable std::atomic<std::uint64_t> multiplications_{0};
};

// ---------------------------------------------------------------------------
// Problem builders

struct PortfolioProblem {
  ProblemSpec spec;
  std::shared_ptr<const LeastSquaresOracle> oracle;
  double b_return = 0.0;
};

/// minimize (1/p) sum_i (a_i^T x - b)^2 over the simplex with a_av^T x >= b.
/// g is the simplex indicator, f the halfspace indicator. `b_return`
/// defaults to mean(a_av).
PortfolioProblem build_portfolio_problem(const ReturnsMatrix& returns,
                                         std::optional<double> b_return = std::nullopt,
                                         kernels::Backend backend = kernels::Backend::serial);

/// The portfolio smooth term evaluated on other rows (e.g. a test split).
std::function<double(const Vector&)> portfolio_objective(const ReturnsMatrix& returns,
                                                         double b_return);

struct SvmProblem {
  ProblemSpec spec;
  std::shared_ptr<const SvmDualOracle> oracle;
  Vector labels;
  double C = 1.0;
  double sigma = 0.25;
};

/// minimize 0.5 x^T M x - sum x_i over [0, C]^d with labels^T x = 0;
/// M_ij = exp(-sigma ||a_i - a_j||^2) b_i b_j. g is the box, f the hyperplane.
/// `features` holds one example per row. Throws DomainError for labels not
/// in {-1, +1}.
SvmProblem build_svm_dual(const RowMatrix& features, const Vector& labels, double C = 1.0,
                          double sigma = 0.25,
                          kernels::Backend backend = kernels::Backend::openmp);
SvmProblem build_svm_dual(const std::vector<Vector>& features, const Vector& labels,
                          double C = 1.0, double sigma = 0.25,
                          kernels::Backend backend = kernels::Backend::openmp);

// ---------------------------------------------------------------------------
// Sparse classification text format: "label idx:val idx:val ...", 1-based.

struct ClassificationData {
  std::vector<Vector> features;
  Vector labels;
  std::size_t dim = 0;
};

/// `dim` fixes the feature dimension; when absent the largest index seen is
/// used. Labels must map to +1 ("1", "+1") or -1 ("-1").
ClassificationData read_sparse_classification(std::istream& in,
                                              std::optional<std::size_t> dim = std::nullopt);
ClassificationData load_sparse_classification(const std::string& path,
                                              std::optional<std::size_t> dim = std::nullopt);

/// Canonical form: "+1"/"-1", nonzero entries only, shortest decimals.
void write_sparse_classification(const ClassificationData& data, std::ostream& out);

// ---------------------------------------------------------------------------
// Synthetic instances

struct SyntheticOptions {
  double mu = 1.0;           // smallest Hessian eigenvalue
  double noise = 1.0;        // target noise standard deviation
  std::size_t reference_iters = 100000;
};

struct SyntheticProblem {
  ProblemSpec spec;
  std::shared_ptr<const LeastSquaresOracle> oracle;
  Vector x_ref;
  double reference_residual = 0.0;
};

/// Least-squares h whose Hessian has eigenvalues mu * condition^(k/(dim-1)),
/// simplex g, halfspace f (a_av^T x >= mean(a_av)). x_ref comes from a long
/// deterministic run. `rows` must be at least `dim`.
SyntheticProblem synth_three_composite(std::size_t dim, std::size_t rows, std::uint64_t seed,
                                       double condition, const SyntheticOptions& options = {});

/// Labelled point cloud in R^features for kernel problems: two Gaussian
/// blobs with labels +-1.
ClassificationData synth_classification(std::size_t examples, std::size_t features,
                                        std::uint64_t seed);

}  // namespace s3cm::problems
