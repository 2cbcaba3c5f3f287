#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace s3cm {

/// Stateful step-size generator. `current()` is gamma_n for the counter n;
/// `advance()` moves to n + 1 and returns gamma_{n+1}. Schedules never end.
class Schedule {
 public:
  virtual ~Schedule() = default;

  virtual double current() const = 0;
  virtual double advance() = 0;
  virtual std::size_t index() const = 0;
  virtual void reset() = 0;
  virtual std::unique_ptr<Schedule> clone() const = 0;

  /// Parameters sufficient to rebuild the schedule (see make_schedule).
  virtual nlohmann::json describe() const = 0;
  virtual std::string kind() const = 0;
};

/// Step rule tied to the strong-convexity constants of h and g:
///   gamma_{n+1} = (-gamma_n^2 mu_h eta + sqrt((gamma_n^2 mu_h eta)^2 + (1 + 2 gamma_n mu_g) gamma_n^2))
///                 / (1 + 2 gamma_n mu_g)
/// evaluated in the cancellation-free form gamma_n^2 / (A + sqrt(A^2 + B gamma_n^2)),
/// with A = gamma_n^2 mu_h eta and B = 1 + 2 gamma_n mu_g.
/// Consecutive steps satisfy gamma_n^-2 (1 + 2 gamma_n mu_g) = gamma_{n+1}^-2 (1 - 2 gamma_{n+1} mu_h eta).
class RecursiveSchedule final : public Schedule {
 public:
  /// Throws DomainError unless gamma0 > 0, eta in (0,1), mu_h > 0, mu_g >= 0.
  /// An unknown mu_h is rejected.
  RecursiveSchedule(double gamma0, double eta, std::optional<double> mu_h, double mu_g = 0.0);

  double current() const override { return gamma_; }
  double advance() override;
  std::size_t index() const override { return n_; }
  void reset() override;
  std::unique_ptr<Schedule> clone() const override;
  nlohmann::json describe() const override;
  std::string kind() const override { return "recursive"; }

  double gamma0() const { return gamma0_; }
  double eta() const { return eta_; }
  double mu_h() const { return mu_h_; }
  double mu_g() const { return mu_g_; }

  /// The one-step map gamma_n -> gamma_{n+1}.
  double successor(double gamma) const;

 private:
  double gamma0_, eta_, mu_h_, mu_g_;
  double gamma_;
  std::size_t n_ = 0;
};

/// gamma_n = gamma0 / (n + 1)^alpha.
class PolynomialSchedule final : public Schedule {
 public:
  PolynomialSchedule(double gamma0, double alpha, std::optional<double> mu_h = std::nullopt);

  double current() const override { return at(n_); }
  double advance() override;
  std::size_t index() const override { return n_; }
  void reset() override { n_ = 0; }
  std::unique_ptr<Schedule> clone() const override;
  nlohmann::json describe() const override;
  std::string kind() const override { return "polynomial"; }

  double at(std::size_t n) const;
  double gamma0() const { return gamma0_; }
  double alpha() const { return alpha_; }

  /// lim 2 mu_h n^alpha gamma_n, i.e. 2 mu_h gamma0. Unknown when mu_h is
  /// unknown.
  std::optional<double> beta() const;

  /// Predicted exponent of E||x_g - x*||^2 from the rate table (-alpha,
  /// -beta, or -1). Nullopt when beta is needed but unknown.
  std::optional<double> predicted_exponent() const;

 private:
  double gamma0_, alpha_;
  std::optional<double> mu_h_;
  std::size_t n_ = 0;
};

/// Fixed step gamma with eps <= gamma <= alpha_r (2/L - eps), for h that is
/// only L-smooth.
class ConstantSchedule final : public Schedule {
 public:
  /// Throws DomainError naming the violated inequality
  /// "ε ≤ γ ≤ α(2L⁻¹ − ε)" when gamma is out of range.
  ConstantSchedule(double gamma, double lipschitz, double epsilon, double alpha_r);

  double current() const override { return gamma_; }
  double advance() override {
    ++n_;
    return gamma_;
  }
  std::size_t index() const override { return n_; }
  void reset() override { n_ = 0; }
  std::unique_ptr<Schedule> clone() const override;
  nlohmann::json describe() const override;
  std::string kind() const override { return "constant"; }

 private:
  double gamma_, lipschitz_, epsilon_, alpha_r_;
  std::size_t n_ = 0;
};

/// Rebuilds a schedule from the output of Schedule::describe().
std::unique_ptr<Schedule> make_schedule(const nlohmann::json& descriptor);

/// |(n_max + 1) gamma_{n_max} (eta mu_h + mu_g) - 1| for a fresh copy of the
/// schedule's parameters.
double asymptotic_limit_check(const RecursiveSchedule& schedule, std::size_t n_max);

struct RateOracleSpec {
  double c = 1.0;
  double alpha = 1.0;
};

/// Worst-case realisation of s_{n+1} = (1 - theta_n) s_n + tau theta_n^2 with
/// theta_n = c n^-alpha. Entries n with theta_n >= 1 (including n = 0) keep
/// s unchanged. Returns s_0 .. s_{n_max}.
std::vector<double> rate_oracle(const RateOracleSpec& spec, double tau, double s0,
                                std::size_t n_max);

/// Exponent the rate recursion predicts for the oracle sequence.
double rate_oracle_predicted_exponent(const RateOracleSpec& spec);

}  // namespace s3cm
