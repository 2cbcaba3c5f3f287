#include "s3cm/schedules.hpp"

#include <cmath>
#include <sstream>

#include "s3cm/core.hpp"

namespace s3cm {

// ---------------------------------------------------------------------------
// RecursiveSchedule

RecursiveSchedule::RecursiveSchedule(double gamma0, double eta, std::optional<double> mu_h,
                                   double mu_g)
    : gamma0_(gamma0), eta_(eta), mu_h_(0.0), mu_g_(mu_g), gamma_(gamma0) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
    throw DomainError("recursive schedule: gamma0 must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("recursive schedule: eta must lie in (0, 1)");
  if (!mu_h) throw DomainError("recursive schedule: requires a known mu_h > 0");
  if (!(*mu_h > 0.0)) throw DomainError("recursive schedule: requires mu_h > 0");
  if (!(mu_g >= 0.0)) throw DomainError("recursive schedule: mu_g must be nonnegative");
  mu_h_ = *mu_h;
}

double RecursiveSchedule::successor(double gamma) const {
  const double a = gamma * gamma * mu_h_ * eta_;
  const double b = 1.0 + 2.0 * gamma * mu_g_;
  return gamma * gamma / (a + std::sqrt(a * a + b * gamma * gamma));
}

double RecursiveSchedule::advance() {
  gamma_ = successor(gamma_);
  ++n_;
  return gamma_;
}

void RecursiveSchedule::reset() {
  gamma_ = gamma0_;
  n_ = 0;
}

std::unique_ptr<Schedule> RecursiveSchedule::clone() const {
  return std::make_unique<RecursiveSchedule>(*this);
}

nlohmann::json RecursiveSchedule::describe() const {
  return {{"kind", kind()}, {"gamma0", gamma0_}, {"eta", eta_}, {"mu_h", mu_h_}, {"mu_g", mu_g_}};
}

// ---------------------------------------------------------------------------
// PolynomialSchedule

PolynomialSchedule::PolynomialSchedule(double gamma0, double alpha, std::optional<double> mu_h)
    : gamma0_(gamma0), alpha_(alpha), mu_h_(mu_h) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
    throw DomainError("polynomial schedule: gamma0 must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("polynomial schedule: alpha must lie in (0, 1]");
  if (mu_h && !(*mu_h >= 0.0)) throw DomainError("polynomial schedule: mu_h must be nonnegative");
}

double PolynomialSchedule::at(std::size_t n) const {
  const double base = static_cast<double>(n) + 1.0;
  return alpha_ == 1.0 ? gamma0_ / base : gamma0_ / std::pow(base, alpha_);
}

double PolynomialSchedule::advance() {
  ++n_;
  return at(n_);
}

std::unique_ptr<Schedule> PolynomialSchedule::clone() const {
  return std::make_unique<PolynomialSchedule>(*this);
}

std::optional<double> PolynomialSchedule::beta() const {
  if (!mu_h_) return std::nullopt;
  // n^alpha gamma_n -> gamma0 for every alpha.
  return 2.0 * *mu_h_ * gamma0_;
}

std::optional<double> PolynomialSchedule::predicted_exponent() const {
  if (alpha_ < 1.0) return -alpha_;
  const auto b = beta();
  if (!b) return std::nullopt;
  return *b < 1.0 ? -*b : -1.0;
}

nlohmann::json PolynomialSchedule::describe() const {
  nlohmann::json j{{"kind", kind()}, {"gamma0", gamma0_}, {"alpha", alpha_}};
  j["mu_h"] = mu_h_ ? nlohmann::json(*mu_h_) : nlohmann::json(nullptr);
  const auto b = beta();
  j["beta"] = b ? nlohmann::json(*b) : nlohmann::json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// ConstantSchedule

ConstantSchedule::ConstantSchedule(double gamma, double lipschitz, double epsilon, double alpha_r)
    : gamma_(gamma), lipschitz_(lipschitz), epsilon_(epsilon), alpha_r_(alpha_r) {
  if (!(lipschitz > 0.0)) throw DomainError("constant schedule: L must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("constant schedule: epsilon must lie in (0, 1)");
  if (!(alpha_r > 0.0 && alpha_r < 1.0))
    throw DomainError("constant schedule: alpha must lie in (0, 1)");
  const double upper = alpha_r * (2.0 / lipschitz - epsilon);
  if (!(gamma >= epsilon && gamma <= upper)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "constant schedule violates ε ≤ γ ≤ α(2L⁻¹ − ε): need " << epsilon << " <= " << gamma
        << " <= " << upper;
    throw DomainError(msg.str());
  }
}

std::unique_ptr<Schedule> ConstantSchedule::clone() const {
  return std::make_unique<ConstantSchedule>(*this);
}

nlohmann::json ConstantSchedule::describe() const {
  return {{"kind", kind()},
          {"gamma", gamma_},
          {"L", lipschitz_},
          {"epsilon", epsilon_},
          {"alpha_r", alpha_r_}};
}

// ---------------------------------------------------------------------------

std::unique_ptr<Schedule> make_schedule(const nlohmann::json& d) {
  const std::string kind = d.at("kind").get<std::string>();
  if (kind == "recursive")
    return std::make_unique<RecursiveSchedule>(d.at("gamma0").get<double>(), d.at("eta").get<double>(),
                                              d.at("mu_h").get<double>(), d.at("mu_g").get<double>());
  if (kind == "polynomial") {
    std::optional<double> mu;
    if (d.contains("mu_h") && !d.at("mu_h").is_null()) mu = d.at("mu_h").get<double>();
    return std::make_unique<PolynomialSchedule>(d.at("gamma0").get<double>(),
                                                d.at("alpha").get<double>(), mu);
  }
  if (kind == "constant")
    return std::make_unique<ConstantSchedule>(d.at("gamma").get<double>(), d.at("L").get<double>(),
                                              d.at("epsilon").get<double>(),
                                              d.at("alpha_r").get<double>());
  throw DomainError("unknown schedule kind '" + kind + "'");
}

double asymptotic_limit_check(const RecursiveSchedule& schedule, std::size_t n_max) {
  if (n_max < 10000) throw DomainError("asymptotic_limit_check: n_max must be at least 1e4");
  double gamma = schedule.gamma0();
  for (std::size_t n = 0; n < n_max; ++n) gamma = schedule.successor(gamma);
  const double limit_inverse = schedule.eta() * schedule.mu_h() + schedule.mu_g();
  return std::abs((static_cast<double>(n_max) + 1.0) * gamma * limit_inverse - 1.0);
}

std::vector<double> rate_oracle(const RateOracleSpec& spec, double tau, double s0,
                                std::size_t n_max) {
  if (!(spec.c > 0.0) || !(tau > 0.0)) throw DomainError("rate_oracle: c and tau must be positive");
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0))
    throw DomainError("rate_oracle: alpha must lie in (0, 1]");
  if (!(s0 >= 0.0)) throw DomainError("rate_oracle: s0 must be nonnegative");
  std::vector<double> s(n_max + 1);
  s[0] = s0;
  for (std::size_t n = 0; n < n_max; ++n) {
    const double theta =
        n == 0 ? kInf : spec.c * std::pow(static_cast<double>(n), -spec.alpha);
    s[n + 1] = theta < 1.0 ? (1.0 - theta) * s[n] + tau * theta * theta : s[n];
  }
  return s;
}

double rate_oracle_predicted_exponent(const RateOracleSpec& spec) {
  if (spec.alpha < 1.0) return -spec.alpha;
  return spec.c < 1.0 ? -spec.c : -1.0;
}

}  // namespace s3cm
