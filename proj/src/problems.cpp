#include "s3cm/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "s3cm/harness.hpp"
#include "s3cm/prox.hpp"
#include "s3cm/trace.hpp"

namespace s3cm::problems {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NaN"; }

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  return solver.eigenvalues();
}

}  // namespace

// ---------------------------------------------------------------------------
// Returns data

ReturnsMatrix ReturnsMatrix::from_values(RowMatrix values) {
  if (values.rows() == 0 || values.cols() == 0) throw DomainError("returns matrix is empty");
  if (!values.allFinite()) throw DomainError("returns matrix has missing or non-finite entries");
  ReturnsMatrix r;
  r.a_av = values.colwise().mean().transpose();
  r.values = std::move(values);
  return r;
}

ReturnsTable read_returns_csv(std::istream& in, char delimiter) {
  std::vector<std::vector<double>> rows;
  ReturnsTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, delimiter);
    if (first_content) {
      first_content = false;
      const bool header = std::any_of(cells.begin(), cells.end(), [](const std::string& c) {
        return !is_missing(c) && !parse_number(c);
      });
      width = cells.size();
      if (header) {
        table.header = cells;
        continue;
      }
    }
    if (cells.size() != width)
      throw ParseError("returns csv: expected " + std::to_string(width) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no);
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (is_missing(cells[c])) {
        row[c] = std::numeric_limits<double>::quiet_NaN();
        ++table.missing;
        continue;
      }
      const auto v = parse_number(cells[c]);
      if (!v) throw ParseError("returns csv: non-numeric cell '" + cells[c] + "'", line_no, c + 1);
      row[c] = *v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("returns csv: no data rows", line_no);

  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

ReturnsTable read_returns_csv(const std::string& path, char delimiter) {
  auto in = open_or_throw(path);
  return read_returns_csv(in, delimiter);
}

ReturnsMatrix load_returns_csv(const std::string& path, char delimiter) {
  ReturnsTable table = read_returns_csv(path, delimiter);
  if (table.missing > 0) return impute_nearest_neighbor(table.values);
  return ReturnsMatrix::from_values(std::move(table.values));
}

ReturnsMatrix impute_nearest_neighbor(const RowMatrix& values) {
  const Eigen::Index rows = values.rows();
  std::vector<Eigen::Index> complete;
  for (Eigen::Index r = 0; r < rows; ++r)
    if (values.row(r).allFinite()) complete.push_back(r);
  if (complete.empty()) throw DomainError("imputation: no complete row to borrow from");

  RowMatrix filled = values;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (values.row(r).allFinite()) continue;
    Eigen::Index best = complete.front();
    double best_dist = kInf;
    for (Eigen::Index candidate : complete) {
      double dist = 0.0;
      for (Eigen::Index c = 0; c < values.cols(); ++c) {
        const double v = values(r, c);
        if (std::isnan(v)) continue;
        const double diff = v - values(candidate, c);
        dist += diff * diff;
      }
      if (dist < best_dist) {  // strict: ties keep the lower index
        best_dist = dist;
        best = candidate;
      }
    }
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      if (std::isnan(values(r, c))) filled(r, c) = values(best, c);
  }
  return ReturnsMatrix::from_values(std::move(filled));
}

void write_returns_csv(const ReturnsMatrix& returns, std::ostream& out, char delimiter) {
  for (Eigen::Index r = 0; r < returns.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < returns.values.cols(); ++c) {
      if (c) out << delimiter;
      out << format_double(returns.values(r, c));
    }
    out << '\n';
  }
}

std::pair<ReturnsMatrix, ReturnsMatrix> train_test_split(const ReturnsMatrix& returns,
                                                         double test_fraction,
                                                         std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DomainError("train_test_split: fraction must lie in (0, 1)");
  const std::size_t days = returns.days();
  const auto test_rows = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(days)));
  if (test_rows == 0 || test_rows >= days)
    throw DomainError("train_test_split: fraction leaves an empty partition");

  std::vector<Eigen::Index> order(days);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  RandomSource rng(seed, 0);
  std::shuffle(order.begin(), order.end(), rng.engine());

  std::vector<Eigen::Index> test(order.begin(), order.begin() + static_cast<long>(test_rows));
  std::vector<Eigen::Index> train(order.begin() + static_cast<long>(test_rows), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  auto take = [&returns](const std::vector<Eigen::Index>& idx) {
    RowMatrix m(static_cast<Eigen::Index>(idx.size()), returns.values.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
      m.row(static_cast<Eigen::Index>(i)) = returns.values.row(idx[i]);
    return ReturnsMatrix::from_values(std::move(m));
  };
  return {take(train), take(test)};
}

// ---------------------------------------------------------------------------
// LeastSquaresOracle

LeastSquaresOracle::LeastSquaresOracle(RowMatrix rows, Vector targets, kernels::Backend backend)
    : rows_(std::move(rows)), targets_(std::move(targets)), backend_(backend) {
  if (rows_.rows() == 0 || rows_.cols() == 0) throw DomainError("least squares: empty data");
  if (targets_.size() != rows_.rows()) throw DomainError("least squares: target count mismatch");
  if (!rows_.allFinite() || !targets_.allFinite())
    throw DomainError("least squares: non-finite data");
  const double scale = 2.0 / static_cast<double>(rows_.rows());
  eigenvalues_ = symmetric_eigenvalues(scale * (rows_.transpose() * rows_));
  constants_.lipschitz = eigenvalues_.maxCoeff();
  constants_.strong_convexity = std::max(0.0, eigenvalues_.minCoeff());
}

double LeastSquaresOracle::value(const Vector& x) const {
  return (rows_ * x - targets_).squaredNorm() / static_cast<double>(rows_.rows());
}

void LeastSquaresOracle::exact_gradient(const Vector& x, Vector& out) const {
  kernels::least_squares_gradient(rows_, x, targets_, 2.0 / static_cast<double>(rows_.rows()), out,
                                  backend_);
}

void LeastSquaresOracle::component_gradient(const Vector& x, std::size_t index, Vector& out) const {
  const auto i = static_cast<Eigen::Index>(index);
  out.noalias() = (2.0 * (rows_.row(i).dot(x) - targets_[i])) * rows_.row(i).transpose();
}

void LeastSquaresOracle::stochastic_gradient(const Vector& x, RandomSource& rng,
                                             Vector& out) const {
  component_gradient(x, rng.uniform_index(static_cast<std::size_t>(rows_.rows())), out);
}

// ---------------------------------------------------------------------------
// SvmDualOracle

SvmDualOracle::SvmDualOracle(RowMatrix kernel, kernels::Backend backend, bool compute_constants)
    : kernel_(std::move(kernel)), backend_(backend) {
  if (kernel_.rows() == 0 || kernel_.rows() != kernel_.cols())
    throw DomainError("svm dual: kernel matrix must be square and nonempty");
  if (compute_constants) {
    const Vector ev = symmetric_eigenvalues(kernel_);
    constants_.lipschitz = ev.maxCoeff();
    constants_.strong_convexity = std::max(0.0, ev.minCoeff());
  }
}

double SvmDualOracle::value(const Vector& x) const {
  Vector mx;
  kernels::matvec(kernel_, x, mx, backend_);
  return 0.5 * x.dot(mx) - x.sum();
}

void SvmDualOracle::count(std::uint64_t columns) const {
  columns_touched_.fetch_add(columns, std::memory_order_relaxed);
  multiplications_.fetch_add(columns * static_cast<std::uint64_t>(kernel_.rows()),
                             std::memory_order_relaxed);
}

void SvmDualOracle::exact_gradient(const Vector& x, Vector& out) const {
  kernels::matvec(kernel_, x, out, backend_);
  out.array() -= 1.0;
  count(static_cast<std::uint64_t>(kernel_.rows()));
}

void SvmDualOracle::component_gradient(const Vector& x, std::size_t index, Vector& out) const {
  const auto i = static_cast<Eigen::Index>(index);
  const double weight = static_cast<double>(kernel_.rows()) * x[i];
  // M is symmetric, so row i is column i and is contiguous in row-major storage.
  out.array() = weight * kernel_.row(i).transpose().array() - 1.0;
  count(1);
}

void SvmDualOracle::stochastic_gradient(const Vector& x, RandomSource& rng, Vector& out) const {
  component_gradient(x, rng.uniform_index(static_cast<std::size_t>(kernel_.rows())), out);
}

SvmDualOracle::Counters SvmDualOracle::counters() const {
  return {columns_touched_.load(std::memory_order_relaxed),
          multiplications_.load(std::memory_order_relaxed)};
}

void SvmDualOracle::reset_counters() const {
  columns_touched_.store(0, std::memory_order_relaxed);
  multiplications_.store(0, std::memory_order_relaxed);
}

// ---------------------------------------------------------------------------
// Builders

PortfolioProblem build_portfolio_problem(const ReturnsMatrix& returns,
                                         std::optional<double> b_return,
                                         kernels::Backend backend) {
  if (returns.assets() < 2) throw DomainError("portfolio: need at least two assets");
  if (returns.days() < 1) throw DomainError("portfolio: need at least one day");
  PortfolioProblem out;
  out.b_return = b_return.value_or(returns.a_av.mean());
  out.oracle = std::make_shared<LeastSquaresOracle>(
      returns.values, Vector::Constant(returns.values.rows(), out.b_return), backend);
  auto g = std::make_shared<prox::SimplexIndicator>();
  auto f = std::make_shared<prox::HalfspaceIndicator>(prox::HalfspaceSet{returns.a_av, out.b_return});
  out.spec = ProblemSpec(out.oracle, f, g);
  return out;
}

std::function<double(const Vector&)> portfolio_objective(const ReturnsMatrix& returns,
                                                         double b_return) {
  auto values = std::make_shared<const RowMatrix>(returns.values);
  return [values, b_return](const Vector& x) {
    return ((*values) * x).array().operator-(b_return).matrix().squaredNorm() /
           static_cast<double>(values->rows());
  };
}

SvmProblem build_svm_dual(const RowMatrix& features, const Vector& labels, double C, double sigma,
                          kernels::Backend backend) {
  if (features.rows() != labels.size())
    throw DomainError("svm: one label per example is required");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 1.0 && labels[i] != -1.0) throw DomainError("svm: labels must be +1 or -1");
  if (!(C > 0.0)) throw DomainError("svm: C must be positive");
  if (!(sigma > 0.0)) throw DomainError("svm: sigma must be positive");

  SvmProblem out;
  out.labels = labels;
  out.C = C;
  out.sigma = sigma;
  out.oracle = std::make_shared<SvmDualOracle>(
      kernels::gaussian_kernel_matrix(features, labels, sigma, backend), kernels::Backend::serial,
      features.rows() <= 2000);
  auto g = std::make_shared<prox::BoxIndicator>(prox::BoxSet{0.0, C});
  auto f = std::make_shared<prox::HyperplaneIndicator>(prox::HyperplaneSet{labels, 0.0});
  out.spec = ProblemSpec(out.oracle, f, g);
  return out;
}

SvmProblem build_svm_dual(const std::vector<Vector>& features, const Vector& labels, double C,
                          double sigma, kernels::Backend backend) {
  if (features.empty()) throw DomainError("svm: no examples");
  RowMatrix m(static_cast<Eigen::Index>(features.size()), features.front().size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != m.cols()) throw DomainError("svm: ragged feature vectors");
    m.row(static_cast<Eigen::Index>(i)) = features[i].transpose();
  }
  return build_svm_dual(m, labels, C, sigma, backend);
}

// ---------------------------------------------------------------------------
// Sparse classification format

ClassificationData read_sparse_classification(std::istream& in, std::optional<std::size_t> dim) {
  struct Entry {
    std::size_t index;
    double value;
  };
  std::vector<std::vector<Entry>> rows;
  std::vector<double> labels;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;  // blank line
    if (token == "+1" || token == "1")
      labels.push_back(1.0);
    else if (token == "-1")
      labels.push_back(-1.0);
    else
      throw ParseError("sparse classification: label '" + token + "' is not +1 or -1", line_no);

    std::vector<Entry> entries;
    std::size_t previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
        throw ParseError("sparse classification: malformed token '" + token + "'", line_no);
      std::size_t index = 0;
      const auto idx_res = std::from_chars(token.data(), token.data() + colon, index);
      if (idx_res.ec != std::errc() || idx_res.ptr != token.data() + colon || index == 0)
        throw ParseError("sparse classification: bad index in '" + token + "'", line_no);
      const auto value = parse_number(token.substr(colon + 1));
      if (!value) throw ParseError("sparse classification: bad value in '" + token + "'", line_no);
      if (dim && index > *dim)
        throw ParseError("sparse classification: index " + std::to_string(index) +
                             " out of range (dim " + std::to_string(*dim) + ")",
                         line_no);
      if (index <= previous)
        throw ParseError("sparse classification: indices must be strictly increasing", line_no);
      previous = index;
      max_index = std::max(max_index, index);
      entries.push_back({index, *value});
    }
    rows.push_back(std::move(entries));
  }

  ClassificationData data;
  data.dim = dim.value_or(max_index);
  data.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  for (const auto& entries : rows) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(data.dim));
    for (const Entry& e : entries) v[static_cast<Eigen::Index>(e.index - 1)] = e.value;
    data.features.push_back(std::move(v));
  }
  return data;
}

ClassificationData load_sparse_classification(const std::string& path,
                                              std::optional<std::size_t> dim) {
  auto in = open_or_throw(path);
  return read_sparse_classification(in, dim);
}

void write_sparse_classification(const ClassificationData& data, std::ostream& out) {
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    out << (data.labels[static_cast<Eigen::Index>(i)] > 0 ? "+1" : "-1");
    const Vector& v = data.features[i];
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (v[k] != 0.0) out << ' ' << (k + 1) << ':' << format_double(v[k]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic instances

namespace {

Matrix orthonormal_columns(Eigen::Index rows, Eigen::Index cols, RandomSource& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

}  // namespace

SyntheticProblem synth_three_composite(std::size_t dim, std::size_t rows, std::uint64_t seed,
                                       double condition, const SyntheticOptions& options) {
  if (dim < 2) throw DomainError("synthetic: dim must be at least 2");
  if (dim > 100) throw DomainError("synthetic: dim is limited to 100");
  if (rows < dim) throw DomainError("synthetic: rows must be at least dim");
  if (!(condition >= 1.0)) throw DomainError("synthetic: condition must be >= 1");
  if (!(options.mu > 0.0)) throw DomainError("synthetic: mu must be positive");

  const auto d = static_cast<Eigen::Index>(dim);
  const auto p = static_cast<Eigen::Index>(rows);
  RandomSource rng(seed, 0x5eed);

  // Hessian (2/p) A^T A = V diag(lambda) V^T.
  Vector lambda(d);
  for (Eigen::Index k = 0; k < d; ++k)
    lambda[k] = options.mu * std::pow(condition, static_cast<double>(k) / static_cast<double>(d - 1));
  const Matrix u = orthonormal_columns(p, d, rng);
  const Matrix v = orthonormal_columns(d, d, rng);
  const Vector singular = (0.5 * static_cast<double>(p) * lambda.array()).sqrt().matrix();
  RowMatrix a = u * singular.asDiagonal() * v.transpose();

  // Targets around a point that sits partly outside the simplex, so the
  // solution has active bounds and nonzero residual noise.
  Vector x_target(d);
  for (Eigen::Index k = 0; k < d; ++k) x_target[k] = -std::log(1.0 - rng.uniform());
  x_target /= x_target.sum();
  for (Eigen::Index k = 0; k < d; ++k) x_target[k] += 0.3 * rng.normal() / std::sqrt(static_cast<double>(d));
  Vector targets = a * x_target;
  for (Eigen::Index i = 0; i < p; ++i) targets[i] += options.noise * rng.normal();

  SyntheticProblem out;
  out.oracle = std::make_shared<LeastSquaresOracle>(a, targets);
  const Vector a_av = a.colwise().mean().transpose();
  auto g = std::make_shared<prox::SimplexIndicator>();
  auto f = std::make_shared<prox::HalfspaceIndicator>(prox::HalfspaceSet{a_av, a_av.mean()});
  out.spec = ProblemSpec(out.oracle, f, g);

  harness::ReferenceOptions ref_options;
  ref_options.iters = options.reference_iters;
  const harness::Reference ref = harness::compute_reference(out.spec, ref_options);
  out.x_ref = ref.x;
  out.reference_residual = ref.residual;
  return out;
}

ClassificationData synth_classification(std::size_t examples, std::size_t features,
                                        std::uint64_t seed) {
  if (examples < 2 || features < 1) throw DomainError("synth_classification: too small");
  RandomSource rng(seed, 0xc1a5);
  ClassificationData data;
  data.dim = features;
  data.labels.resize(static_cast<Eigen::Index>(examples));
  Vector center(static_cast<Eigen::Index>(features));
  for (Eigen::Index k = 0; k < center.size(); ++k) center[k] = rng.normal();
  center *= 1.5 / center.norm();
  for (std::size_t i = 0; i < examples; ++i) {
    const double label = (i % 2 == 0) ? 1.0 : -1.0;
    Vector x(static_cast<Eigen::Index>(features));
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = rng.normal();
    data.features.push_back(x + label * center);
    data.labels[static_cast<Eigen::Index>(i)] = label;
  }
  return data;
}

}  // namespace s3cm::problems
