#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sdfkit/ftap.hpp"
#include "sdfkit/market.hpp"

namespace sdfkit {

enum class UtilityFamily { Log, Power, Exponential };

/// Concave utility: log(x), x^(1-gamma)/(1-gamma), or -exp(-alpha x).
/// Log and power live on (0, inf); exponential on the whole line.
class UtilitySpec {
 public:
  static UtilitySpec log();
  static UtilitySpec power(double gamma);
  static UtilitySpec exponential(double alpha);
  /// "log", "power:gamma=2", "exp:alpha=1".
  static UtilitySpec parse(const std::string& text);

  UtilityFamily family() const { return family_; }
  double parameter() const { return parameter_; }
  std::string to_string() const;

  bool in_domain(double x) const;
  bool bounded_below_domain() const { return family_ != UtilityFamily::Exponential; }
  double value(double x) const;
  double first_derivative(double x) const;
  double second_derivative(double x) const;

 private:
  UtilitySpec(UtilityFamily f, double p) : family_(f), parameter_(p) {}
  UtilityFamily family_;
  double parameter_;
};

/// Finite-difference check of U' > 0 and U'' < 0 on a grid inside the domain.
bool check_utility_shape(const UtilitySpec& u);

struct UtilityEvaluation {
  double value = 0.0;
  Vec gradient;  // d/dtheta^i
  Mat hessian;   // sum_omega P U''(X) v v^T
};

/// E[U(X_T)] for the given strategy with its theta-gradient and Hessian.
/// Throws DomainViolation if some terminal wealth leaves the utility domain.
UtilityEvaluation expected_utility(const DiscreteMarket& market, const UtilitySpec& u, const Strategy& strat);

struct SolverDiagnostics {
  int iterations = 0;
  double gradient_norm = 0.0;
  int gradient_steps = 0;  // iterations that fell back to gradient ascent
};

struct OptimalSolution {
  Vec theta_star;
  double x = 0.0;
  Vec wealth_star;
  double objective = 0.0;
  SdfVector sdf;
  SolverDiagnostics diagnostics;
};

struct OptimizeOptions {
  std::optional<Vec> start;  // defaults to theta = 0
  bool lp_precheck = true;   // run find_arbitrage before iterating
  int max_iterations = 200;
};

/// Maximizes E[U(X_T^{(x;theta)})] over theta by damped Newton.
///
/// Newton directions use the exact Hessian restricted to eigen-directions with
/// condition number <= 1e12; when no ascent direction survives, the step falls
/// back to the gradient with Armijo backtracking. For log and power utility the
/// line search never lets min X_T drop below 1e-12 x. When the iteration stops,
/// the latest step direction is tested as an unbounded improving ray (60
/// doublings); success means the supremum is not attained and
/// ArbitrageDetected is thrown.
///
/// Errors: ArbitrageDetected, DomainViolation, MaxIterationsExceeded.
OptimalSolution optimize(const DiscreteMarket& market, const UtilitySpec& u, double x,
                         const OptimizeOptions& options = {});

/// Y_T = U'(X*) / E[(S0_T/S0_0) U'(X*)].
SdfVector utility_sdf(const DiscreteMarket& market, const UtilitySpec& u, const Vec& wealth);

struct SdfMartingaleReport {
  int trials = 0;
  int failures = 0;
  double max_deviation = 0.0;  // max |E[Y X^{(x;theta)}] - x| / (1 + |x|)
};

/// Checks E[Y_T X_T^{(x;theta)}] = x on `trials` random (x, theta) pairs.
SdfMartingaleReport verify_sdf_martingale(const DiscreteMarket& market, const SdfVector& sdf, int trials,
                                          std::uint64_t seed = 0x5eed);

struct LogIdentityReport {
  OptimalSolution solution;
  double max_product_deviation = 0.0;   // max |Y X* - x|
  double inverse_wealth_deviation = 0.0;  // |x E[1/(beta X*)] - 1|
  bool holds = false;
};

/// Log-utility optimum at capital x: Y_T X*_T = x in every outcome and
/// E[1/(beta_T X*_T)] = 1/x, both to 1e-9. At x = 1 this is Y* = 1/X*.
LogIdentityReport log_optimal_identity(const DiscreteMarket& market, double x = 1.0);

}  // namespace sdfkit
