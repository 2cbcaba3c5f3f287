#include "s3cm/core.hpp"

#include <cmath>
#include <utility>

namespace s3cm {

NumericalError::NumericalError(std::string operation, std::size_t iteration)
    : std::runtime_error("non-finite value in " + operation + " at iteration " +
                         std::to_string(iteration)),
      operation_(std::move(operation)),
      iteration_(iteration) {}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(
          what + (line ? " (line " + std::to_string(line) +
                             (column ? ", column " + std::to_string(column) : std::string()) + ")"
                       : std::string())),
      line_(line),
      column_(column) {}

void require_finite(const Vector& v, const char* operation, std::size_t iteration) {
  if (!all_finite(v)) throw NumericalError(operation, iteration);
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x53334u};
  engine_.seed(seq);
}

std::size_t RandomSource::uniform_index(std::size_t n) {
  if (n == 0) throw DomainError("uniform_index: empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

double RandomSource::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RandomSource::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

void SmoothOracle::component_gradient(const Vector&, std::size_t, Vector&) const {
  throw ContractError("oracle is not an enumerable finite sum");
}

Vector SmoothOracle::exact_gradient(const Vector& x) const {
  Vector out(x.size());
  exact_gradient(x, out);
  return out;
}

Vector ProxTerm::prox(const Vector& x, double gamma) const {
  Vector out(x.size());
  prox(x, gamma, out);
  return out;
}

ProblemSpec::ProblemSpec(std::shared_ptr<const SmoothOracle> h_, std::shared_ptr<const ProxTerm> f_,
                         std::shared_ptr<const ProxTerm> g_)
    : h(std::move(h_)), f(std::move(f_)), g(std::move(g_)), dim(h ? h->dim() : 0) {
  validate();
}

void ProblemSpec::validate() const {
  if (!h || !f || !g) throw DomainError("problem spec: h, f and g must all be set");
  if (dim == 0) throw DomainError("problem spec: dimension must be positive");
  if (h->dim() != dim) throw DomainError("problem spec: smooth term dimension mismatch");
  for (const ProxTerm* t : {f.get(), g.get()})
    if (t->fixed_dim() && *t->fixed_dim() != dim)
      throw DomainError("problem spec: " + t->name() + " term dimension mismatch");
}

double fixed_point_residual(const ProblemSpec& spec, const SolverState& state) {
  if (!spec.h->has_exact_gradient())
    throw ContractError("fixed_point_residual requires an exact gradient");
  const double gamma = state.gamma;
  Vector x_g_next = spec.g->prox(state.x_f + gamma * state.u_g, gamma);
  Vector u_next = (state.x_f - x_g_next) / gamma + state.u_g;
  Vector grad = spec.h->exact_gradient(x_g_next);
  Vector x_f_next = spec.f->prox(x_g_next - gamma * u_next - gamma * grad, gamma);
  return (x_g_next - state.x_g).norm() + (state.x_f - x_g_next).norm() +
         (x_f_next - state.x_f).norm();
}

double check_unbiasedness(const SmoothOracle& oracle, const Vector& point) {
  const auto count = oracle.num_components();
  if (!count || *count == 0)
    throw ContractError("check_unbiasedness: oracle components are not enumerable");
  Vector sum = Vector::Zero(point.size());
  Vector sample(point.size());
  for (std::size_t i = 0; i < *count; ++i) {
    oracle.component_gradient(point, i, sample);
    sum += sample;
  }
  sum /= static_cast<double>(*count);
  return (sum - oracle.exact_gradient(point)).cwiseAbs().maxCoeff();
}

}  // namespace s3cm
