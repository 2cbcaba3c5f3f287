// Serial reference vs OpenMP kernels. Each benchmark takes the backend as
// its first argument (0 = serial, 1 = openmp).

#include <benchmark/benchmark.h>

#include "s3cm/harness.hpp"
#include "s3cm/kernels.hpp"
#include "s3cm/problems.hpp"

using namespace s3cm;

namespace {

kernels::Backend backend_of(const benchmark::State& state) {
  return state.range(0) == 0 ? kernels::Backend::serial : kernels::Backend::openmp;
}

RowMatrix random_rows(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  RandomSource rng(seed, 0);
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void BM_KernelMatrix(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(1));
  const RowMatrix feats = random_rows(d, 10, 1);
  const Vector labels = Vector::Ones(d);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::gaussian_kernel_matrix(feats, labels, 0.25, backend_of(state)));
  state.SetLabel(std::string(kernels::to_string(backend_of(state))));
}

void BM_Matvec(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(1));
  const RowMatrix k = random_rows(d, d, 2);
  const Vector x = random_rows(d, 1, 3).col(0);
  Vector out;
  for (auto _ : state) {
    kernels::matvec(k, x, out, backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(std::string(kernels::to_string(backend_of(state))));
}

void BM_LeastSquaresGradient(benchmark::State& state) {
  const auto p = static_cast<Eigen::Index>(state.range(1));
  const RowMatrix a = random_rows(p, 50, 4);
  const Vector t = random_rows(p, 1, 5).col(0);
  const Vector x = random_rows(50, 1, 6).col(0);
  Vector out;
  for (auto _ : state) {
    kernels::least_squares_gradient(a, x, t, 2.0 / static_cast<double>(p), out, backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(std::string(kernels::to_string(backend_of(state))));
}

void BM_MonteCarlo(benchmark::State& state) {
  problems::SyntheticOptions options;
  options.reference_iters = 20000;
  static const auto p = problems::synth_three_composite(20, 100, 7, 1.0, options);
  S3cmConfig c;
  c.schedule = std::make_shared<PolynomialSchedule>(1.0, 1.0, 1.0);
  c.max_iters = 2000;
  c.record_every = 20;
  c.reference = p.x_ref;
  harness::McOptions mc;
  mc.backend = backend_of(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(harness::monte_carlo(p.spec, c, static_cast<std::size_t>(state.range(1)), 0, mc));
  state.SetLabel(std::string(kernels::to_string(backend_of(state))));
}

}  // namespace

BENCHMARK(BM_KernelMatrix)->ArgsProduct({{0, 1}, {400, 2000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Matvec)->ArgsProduct({{0, 1}, {400, 2000}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LeastSquaresGradient)->ArgsProduct({{0, 1}, {1000, 20000}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MonteCarlo)->ArgsProduct({{0, 1}, {20}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
