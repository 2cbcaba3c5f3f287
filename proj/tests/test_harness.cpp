#include <doctest.h>

#include <cmath>
#include <sstream>

#include "s3cm/harness.hpp"
#include "s3cm/problems.hpp"
#include "s3cm/prox.hpp"

using namespace s3cm;
using namespace s3cm::harness;

namespace {

std::shared_ptr<problems::LeastSquaresOracle> two_by_two() {
  RowMatrix a(2, 2);
  a << 1, 2, 3, -1;
  Vector t(2);
  t << 1, 2;
  return std::make_shared<problems::LeastSquaresOracle>(a, t);
}

problems::SyntheticProblem small_synthetic() {
  problems::SyntheticOptions options;
  options.reference_iters = 20000;
  return problems::synth_three_composite(5, 30, 9, 2.0, options);
}

S3cmConfig mc_config(const problems::SyntheticProblem& p, std::size_t iters) {
  S3cmConfig c;
  c.schedule = std::make_shared<PolynomialSchedule>(1.0, 1.0, *p.oracle->constants().strong_convexity);
  c.max_iters = iters;
  c.rng = RandomSource(17, 0);
  c.record_every = 10;
  c.reference = p.x_ref;
  c.relative_distance = true;
  return c;
}

bool same_envelope(const Envelope& a, const Envelope& b) {
  return a.mean == b.mean && a.min == b.min && a.max == b.max;
}

}  // namespace

TEST_CASE("reference of an unconstrained and a constrained quadratic") {
  auto h = two_by_two();
  auto zero = std::make_shared<prox::ZeroTerm>();
  // Normal equations: 10x - y = 7, -x + 5y = 0.
  const Reference r = compute_reference(ProblemSpec(h, zero, zero), {20000, std::nullopt});
  CHECK(std::abs(r.x[0] - 35.0 / 49.0) <= 1e-8);
  CHECK(std::abs(r.x[1] - 7.0 / 49.0) <= 1e-8);
  CHECK(r.residual <= 1e-10);

  // With x1 <= 1/2 active: 5y = x1 gives y = 1/10.
  Vector a(2);
  a << -1, 0;
  auto half = std::make_shared<prox::HalfspaceIndicator>(prox::HalfspaceSet{a, -0.5});
  const ProblemSpec constrained(h, zero, half);
  const Reference c = compute_reference(constrained, {20000, std::nullopt});
  CHECK(std::abs(c.x[0] - 0.5) <= 1e-8);
  CHECK(std::abs(c.x[1] - 0.1) <= 1e-8);
  CHECK(compute_reference(constrained, {20000, std::nullopt}).x == c.x);
}

TEST_CASE("reference run with an oversized step is rejected") {
  auto h = two_by_two();
  auto zero = std::make_shared<prox::ZeroTerm>();
  const double lip = *h->constants().lipschitz;
  CHECK_THROWS_AS(compute_reference(ProblemSpec(h, zero, zero), {100, 2.2 / lip}), ReferenceError);
  CHECK_THROWS_AS(compute_reference(ProblemSpec(h, zero, zero), {5, std::nullopt}), DomainError);
}

TEST_CASE("single replica has a degenerate envelope") {
  const auto p = small_synthetic();
  const McSummary s = monte_carlo(p.spec, mc_config(p, 200), 1, 0);
  REQUIRE(s.dist_sq.has_value());
  CHECK(s.dist_sq->min == s.dist_sq->max);
  CHECK(s.dist_sq->mean == s.dist_sq->min);
  CHECK(s.objective.min == s.objective.max);
}

TEST_CASE("identical streams give identical replicas") {
  const auto p = small_synthetic();
  McOptions options;
  options.identical_streams = true;
  const McSummary s = monte_carlo(p.spec, mc_config(p, 200), 8, 3, options);
  CHECK(s.stream_ids == std::vector<std::uint64_t>(8, 3));
  CHECK(s.dist_sq->min == s.dist_sq->max);
  for (const Trace& t : s.traces) CHECK(t.final_iterate == s.traces[0].final_iterate);
}

TEST_CASE("hundred replicas: envelope, reruns and backends") {
  const auto p = small_synthetic();
  const S3cmConfig c = mc_config(p, 500);
  McOptions omp, serial;
  serial.backend = kernels::Backend::serial;
  const McSummary a = monte_carlo(p.spec, c, 100, 0, omp);
  const McSummary b = monte_carlo(p.spec, c, 100, 0, omp);
  const McSummary s = monte_carlo(p.spec, c, 100, 0, serial);
  CHECK(a.failed.empty());

  bool spread = false;
  for (std::size_t i = 0; i < a.n.size(); ++i) {
    CHECK(a.dist_sq->min[i] <= a.dist_sq->mean[i]);
    CHECK(a.dist_sq->mean[i] <= a.dist_sq->max[i]);
    spread = spread || a.dist_sq->max[i] > a.dist_sq->min[i];
  }
  CHECK(spread);
  CHECK(same_envelope(*a.dist_sq, *b.dist_sq));
  CHECK(same_envelope(a.objective, b.objective));
  CHECK(same_envelope(*a.dist_sq, *s.dist_sq));
  CHECK(same_envelope(a.u_norm, s.u_norm));

  // The mean recomputed from the stored traces.
  double worst = 0.0;
  for (std::size_t i = 0; i < a.n.size(); ++i) {
    double sum = 0.0;
    for (const Trace& t : a.traces) sum += *t.rows[i].dist_sq;
    worst = std::max(worst, std::abs(sum / 100.0 - a.dist_sq->mean[i]) / a.dist_sq->mean[i]);
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("failed replicas are reported and excluded") {
  const auto p = small_synthetic();
  const S3cmConfig c = mc_config(p, 100);
  const Runner runner = [&](const S3cmConfig& local) {
    if (local.rng.stream_id() == 12) throw NumericalError("prox_f", 7);
    return s3cm_run(p.spec, local);
  };
  const McSummary s = monte_carlo(runner, c, 4, 10);
  REQUIRE(s.failed.size() == 1);
  CHECK(s.failed[0].first == 2);
  CHECK(s.failed[0].second.find("prox_f") != std::string::npos);
  const McSummary only = monte_carlo(
      [&](const S3cmConfig&) -> Trace { throw NumericalError("prox_g", 1); }, c, 2, 0);
  CHECK(only.failed.size() == 2);
  CHECK(only.n.empty());
  CHECK_THROWS_AS(monte_carlo(p.spec, c, 0, 0), DomainError);
}

TEST_CASE("relative squared distance") {
  Vector x(2), r(2);
  x << 1, 1;
  r << 1, 0;
  CHECK(dist_sq_rel(x, r).value == 1.0);
  CHECK_FALSE(dist_sq_rel(x, r).absolute_fallback);
  CHECK(dist_sq_rel(r, r).value == 0.0);
  const auto fallback = dist_sq_rel(x, Vector::Zero(2));
  CHECK(fallback.absolute_fallback);
  CHECK(fallback.value == 2.0);
  CHECK_THROWS_AS(dist_sq_rel(x, Vector::Zero(3)), DomainError);
}

TEST_CASE("slope fits recover exact power laws") {
  for (double p : {-2.0, -0.7, -0.5, 0.3}) {
    std::vector<double> n, v;
    for (int k = 1; k <= 50; ++k) {
      n.push_back(10.0 * k);
      v.push_back(3.0 * std::pow(10.0 * k, p));
    }
    CHECK(std::abs(fit_loglog_slope(n, v) - p) <= 1e-6);

    Trace t;
    for (std::size_t k = 0; k <= 1000; k += 10)
      t.rows.push_back({k, 1.0, 2.0 * std::pow(double(k), p), 5.0 * std::pow(double(k), p), 1.0});
    CHECK(std::abs(fit_rate(t, Metric::objective) - p) <= 1e-6);
    CHECK(std::abs(fit_rate(t, Metric::dist_sq, Window{100, 500}) - p) <= 1e-6);
  }
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(fit_loglog_slope(one, one), DomainError);
  const std::vector<double> n{1.0, 2.0}, bad{1.0, 0.0};
  CHECK_THROWS_AS(fit_loglog_slope(n, bad), DomainError);
  Trace short_trace;
  for (std::size_t k = 1; k <= 5; ++k) short_trace.rows.push_back({k, 1.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(fit_rate(short_trace, Metric::objective), DomainError);
}

TEST_CASE("variance monitor") {
  const auto p = small_synthetic();
  S3cmConfig c = mc_config(p, 2000);
  c.record_every = 100;
  c.record_iterates = true;
  const Trace trace = s3cm_run(p.spec, c);
  const auto* h = p.oracle.get();

  const auto exact = variance_monitor(
      p.spec, trace, 10, {}, [h](const Vector& x, std::size_t, RandomSource&, Vector& out) {
        h->exact_gradient(x, out);
      });
  for (double v : exact.variance) CHECK(v == 0.0);
  CHECK_FALSE(exact.superlinear);

  const auto plain = variance_monitor(p.spec, trace, 200, RandomSource(1, 0));
  const auto [lo, hi] = std::minmax_element(plain.variance.begin(), plain.variance.end());
  CHECK(*lo > 0.0);
  CHECK(*hi < 100.0 * *lo);
  CHECK_FALSE(plain.superlinear);

  // Noise with variance proportional to n sums to ~ n^2.
  const auto injected = variance_monitor(
      p.spec, trace, 50, RandomSource(2, 0),
      [h](const Vector& x, std::size_t n, RandomSource& rng, Vector& out) {
        h->exact_gradient(x, out);
        for (Eigen::Index i = 0; i < out.size(); ++i)
          out[i] += std::sqrt(1.0 + static_cast<double>(n)) * rng.normal();
      });
  CHECK(injected.superlinear);
  CHECK(injected.growth_exponent > 1.5);

  Trace bare = trace;
  bare.iterates.clear();
  CHECK_THROWS_AS(variance_monitor(p.spec, bare), DomainError);
}

TEST_CASE("trace csv round trip") {
  Trace t;
  t.rows.push_back({0, 1.0, 0.1, std::nullopt, 0.0});
  t.rows.push_back({5, 1.0 / 3.0, 1e-300, 2.5e-17, 123456.789});
  std::stringstream ss;
  write_trace_csv(t, ss);
  CHECK(ss.str().rfind("n,gamma,objective,dist_sq,u_norm\n", 0) == 0);
  const auto rows = read_trace_csv(ss);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].dist_sq.has_value());
  CHECK(rows[1].n == 5);
  CHECK(rows[1].gamma == 1.0 / 3.0);
  CHECK(rows[1].objective == 1e-300);
  CHECK(*rows[1].dist_sq == 2.5e-17);
  CHECK(rows[1].u_norm == 123456.789);
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("summary json") {
  const auto p = small_synthetic();
  const McSummary s = monte_carlo(p.spec, mc_config(p, 100), 3, 5);
  const auto j = summary_to_json(s);
  CHECK(j["replicas"] == 3);
  CHECK(j["stream_ids"] == nlohmann::json::array({5, 6, 7}));
  CHECK(j["failed"].empty());
  CHECK(j["final"]["n"] == 100);
  CHECK(j["final"]["dist_sq_mean"].get<double>() == s.dist_sq->mean.back());
}
