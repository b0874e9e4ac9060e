#include "sdfkit/utility.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sdfkit/error.hpp"

namespace sdfkit {

namespace {

constexpr double kGradientTolerance = 1e-9;
constexpr double kPolishTolerance = 1e-14;
constexpr int kMaxPolish = 3;
constexpr double kMaxCondition = 1e12;
constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr int kRayDoublings = 60;
constexpr double kDomainFloor = 1e-12;

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw Error(ErrorCode::InvalidUtility, "bad " + what + " '" + text + "'");
  return v;
}

double parse_keyed(const std::string& rest, const std::string& key) {
  const std::string prefix = key + "=";
  if (rest.rfind(prefix, 0) != 0) throw Error(ErrorCode::InvalidUtility, "expected '" + prefix + "<value>'");
  return parse_number(rest.substr(prefix.size()), key);
}

}  // namespace

UtilitySpec UtilitySpec::log() { return {UtilityFamily::Log, 0.0}; }

UtilitySpec UtilitySpec::power(double gamma) {
  if (!std::isfinite(gamma) || !(gamma > 0.0) || gamma == 1.0)
    throw Error(ErrorCode::InvalidUtility, "power utility needs gamma in (0,1) or (1,inf)");
  return {UtilityFamily::Power, gamma};
}

UtilitySpec UtilitySpec::exponential(double alpha) {
  if (!std::isfinite(alpha) || !(alpha > 0.0))
    throw Error(ErrorCode::InvalidUtility, "exponential utility needs alpha > 0");
  return {UtilityFamily::Exponential, alpha};
}

UtilitySpec UtilitySpec::parse(const std::string& text) {
  if (text == "log") return log();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  if (head == "power") return power(parse_keyed(rest, "gamma"));
  if (head == "exp" || head == "exponential") return exponential(parse_keyed(rest, "alpha"));
  throw Error(ErrorCode::InvalidUtility, "unknown utility '" + text + "'");
}

std::string UtilitySpec::to_string() const {
  char buf[64];
  switch (family_) {
    case UtilityFamily::Log: return "log";
    case UtilityFamily::Power: std::snprintf(buf, sizeof buf, "power:gamma=%.17g", parameter_); return buf;
    case UtilityFamily::Exponential: std::snprintf(buf, sizeof buf, "exp:alpha=%.17g", parameter_); return buf;
  }
  return "unknown";
}

bool UtilitySpec::in_domain(double x) const {
  if (!std::isfinite(x)) return false;
  return family_ == UtilityFamily::Exponential || x > 0.0;
}

double UtilitySpec::value(double x) const {
  switch (family_) {
    case UtilityFamily::Log: return std::log(x);
    case UtilityFamily::Power: return std::pow(x, 1.0 - parameter_) / (1.0 - parameter_);
    case UtilityFamily::Exponential: return -std::exp(-parameter_ * x);
  }
  return 0.0;
}

double UtilitySpec::first_derivative(double x) const {
  switch (family_) {
    case UtilityFamily::Log: return 1.0 / x;
    case UtilityFamily::Power: return std::pow(x, -parameter_);
    case UtilityFamily::Exponential: return parameter_ * std::exp(-parameter_ * x);
  }
  return 0.0;
}

double UtilitySpec::second_derivative(double x) const {
  switch (family_) {
    case UtilityFamily::Log: return -1.0 / (x * x);
    case UtilityFamily::Power: return -parameter_ * std::pow(x, -parameter_ - 1.0);
    case UtilityFamily::Exponential: return -parameter_ * parameter_ * std::exp(-parameter_ * x);
  }
  return 0.0;
}

bool check_utility_shape(const UtilitySpec& u) {
  std::vector<double> grid;
  if (u.family() == UtilityFamily::Exponential) {
    const double span = 5.0 / u.parameter();
    for (int k = -20; k <= 20; ++k) grid.push_back(span * k / 20.0);
  } else {
    for (int k = -8; k <= 8; ++k) grid.push_back(std::pow(10.0, k / 4.0));
  }
  for (double x : grid) {
    const double h = 1e-3 * std::max(1e-2, std::abs(x)) / (u.family() == UtilityFamily::Exponential ? u.parameter() : 1.0);
    const double lo = u.value(x - h), mid = u.value(x), hi = u.value(x + h);
    if (!((hi - lo) / (2.0 * h) > 0.0)) return false;
    if (!((hi - 2.0 * mid + lo) / (h * h) < 0.0)) return false;
  }
  return true;
}

UtilityEvaluation expected_utility(const DiscreteMarket& market, const UtilitySpec& u, const Strategy& strat) {
  const Vec wealth = terminal_wealth(market, strat);
  const Vec& p = market.prob();
  const auto n = wealth.size();
  Vec up(n), upp(n);
  UtilityEvaluation out;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!u.in_domain(wealth(k)))
      throw Error(ErrorCode::DomainViolation, "terminal wealth " + std::to_string(wealth(k)) + " outside utility domain");
    out.value += p(k) * u.value(wealth(k));
    up(k) = p(k) * u.first_derivative(wealth(k));
    upp(k) = p(k) * u.second_derivative(wealth(k));
  }
  const Mat v = market.excess_payoffs();
  out.gradient = v * up;
  out.hessian = v * upp.asDiagonal() * v.transpose();
  return out;
}

SdfVector utility_sdf(const DiscreteMarket& market, const UtilitySpec& u, const Vec& wealth) {
  Vec marginal(wealth.size());
  for (Eigen::Index k = 0; k < wealth.size(); ++k) marginal(k) = u.first_derivative(wealth(k));
  const double norm = expectation(market, market.growth().cwiseProduct(marginal));
  return {marginal / norm};
}

namespace {

// E[U(X)] with -inf outside the domain.
double objective_or_minus_inf(const DiscreteMarket& market, const UtilitySpec& u, const Vec& wealth, double floor) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < wealth.size(); ++k) {
    if (!u.in_domain(wealth(k)) || wealth(k) < floor) return -std::numeric_limits<double>::infinity();
    total += market.prob()(k) * u.value(wealth(k));
  }
  return total;
}

// True when the wealth change `delta` behaves like an arbitrage payoff: the
// objective keeps improving along X + 2^j delta for j = 1..60.
bool improving_ray(const DiscreteMarket& market, const UtilitySpec& u, const Vec& wealth, Vec delta, double floor) {
  const double top = delta.cwiseAbs().maxCoeff();
  if (!(top > 0.0)) return false;
  for (Eigen::Index k = 0; k < delta.size(); ++k)
    if (std::abs(delta(k)) <= 1e-9 * top) delta(k) = 0.0;

  const double start = objective_or_minus_inf(market, u, wealth, floor);
  double previous = start;
  double t = 1.0;
  for (int j = 1; j <= kRayDoublings; ++j) {
    t *= 2.0;
    const double f = objective_or_minus_inf(market, u, wealth + t * delta, floor);
    if (!(f >= previous)) return false;
    previous = f;
  }
  return previous - start > 1e-12 * std::max(1.0, std::abs(start));
}

}  // namespace

OptimalSolution optimize(const DiscreteMarket& market, const UtilitySpec& u, double x, const OptimizeOptions& options) {
  if (!std::isfinite(x)) throw Error(ErrorCode::DomainViolation, "initial capital must be finite");
  if (u.bounded_below_domain() && !(x > 0.0))
    throw Error(ErrorCode::DomainViolation, "log and power utility need positive initial capital");
  if (options.lp_precheck && find_arbitrage(market))
    throw Error(ErrorCode::ArbitrageDetected, "market admits arbitrage; expected utility has no maximizer");

  const auto d = static_cast<Eigen::Index>(market.num_assets());
  Vec theta = options.start.value_or(Vec::Zero(d));
  if (theta.size() != d) throw Error(ErrorCode::DimensionMismatch, "start point must have one entry per asset");
  const double floor = u.bounded_below_domain() ? kDomainFloor * x : -std::numeric_limits<double>::infinity();
  {
    const Vec w0 = terminal_wealth(market, {x, theta});
    for (Eigen::Index k = 0; k < w0.size(); ++k)
      if (!u.in_domain(w0(k)) || w0(k) < floor)
        throw Error(ErrorCode::DomainViolation, "start point leaves the utility domain");
  }

  const Mat v = market.excess_payoffs();
  SolverDiagnostics diag;
  Vec last_step = Vec::Zero(d);
  bool converged = false;
  int polish = 0;
  UtilityEvaluation eval;

  for (int it = 0;; ++it) {
    eval = expected_utility(market, u, {x, theta});
    const double scale = std::max(1.0, std::abs(eval.value));
    diag.gradient_norm = d > 0 ? eval.gradient.lpNorm<Eigen::Infinity>() : 0.0;
    diag.iterations = it;
    converged = diag.gradient_norm <= kGradientTolerance * scale;
    if (converged) {
      // a few more Newton steps are cheap and buy several digits
      if (diag.gradient_norm <= kPolishTolerance * scale || polish >= kMaxPolish) break;
      ++polish;
    }
    if (it >= options.max_iterations) break;

    Vec direction = Vec::Zero(d);
    Eigen::SelfAdjointEigenSolver<Mat> eig(-eval.hessian);
    const Vec& ev = eig.eigenvalues();
    const double top = ev.maxCoeff();
    bool newton = false;
    if (top > 0.0) {
      for (Eigen::Index k = 0; k < d; ++k) {
        if (ev(k) * kMaxCondition <= top) continue;
        const Vec q = eig.eigenvectors().col(k);
        direction += (q.dot(eval.gradient) / ev(k)) * q;
        newton = true;
      }
    }
    if (!newton || !(direction.dot(eval.gradient) > 0.0)) {
      direction = eval.gradient;
      ++diag.gradient_steps;
    }

    const Vec wealth = terminal_wealth(market, {x, theta});
    const Vec dw = v.transpose() * direction;
    double step = 1.0;
    if (u.bounded_below_domain()) {
      for (Eigen::Index k = 0; k < dw.size(); ++k)
        if (dw(k) < 0.0) step = std::min(step, 0.99 * (wealth(k) - floor) / -dw(k));
    }
    const double slope = direction.dot(eval.gradient);
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      const double f = objective_or_minus_inf(market, u, wealth + step * dw, floor);
      if (f >= eval.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    last_step = step * direction;
    theta += last_step;
  }

  const Vec wealth = terminal_wealth(market, {x, theta});
  if (d > 0) {
    // Candidate rays: the last step, and directions Newton dropped as flat.
    // Along an arbitrage the curvature decays faster than the gradient, so
    // the iterate ends up crawling in exactly those directions.
    std::vector<Vec> rays{last_step};
    Eigen::SelfAdjointEigenSolver<Mat> eig(-eval.hessian);
    const double top = eig.eigenvalues().maxCoeff();
    // payoff differences this small are rounding noise, not a free lunch
    const double negligible =
        1e-10 * std::max(market.asset_sT().cwiseAbs().maxCoeff(),
                         market.asset_s0().cwiseAbs().maxCoeff() * market.baseline_sT().maxCoeff() /
                             market.baseline_s0());
    for (Eigen::Index k = 0; k < d; ++k) {
      if (top > 0.0 && eig.eigenvalues()(k) * kMaxCondition > top) continue;
      const Vec q = eig.eigenvectors().col(k);
      if ((v.transpose() * q).cwiseAbs().maxCoeff() <= negligible) continue;
      rays.push_back(q.dot(eval.gradient) >= 0.0 ? q : Vec(-q));
    }
    for (const Vec& ray : rays)
      if (improving_ray(market, u, wealth, v.transpose() * ray, floor))
        throw Error(ErrorCode::ArbitrageDetected, "objective improves without bound along the search direction");
  }
  if (!converged)
    throw Error(ErrorCode::MaxIterationsExceeded,
                "first-order conditions not met after " + std::to_string(diag.iterations) + " iterations");

  OptimalSolution sol;
  sol.theta_star = theta;
  sol.x = x;
  sol.wealth_star = wealth;
  sol.objective = eval.value;
  sol.sdf = utility_sdf(market, u, wealth);
  sol.diagnostics = diag;
  return sol;
}

SdfMartingaleReport verify_sdf_martingale(const DiscreteMarket& market, const SdfVector& sdf, int trials,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  const auto d = static_cast<Eigen::Index>(market.num_assets());
  SdfMartingaleReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const double x = coord(rng);
    Vec theta(d);
    for (Eigen::Index i = 0; i < d; ++i) theta(i) = coord(rng);
    const Vec deflated = sdf.y_T.cwiseProduct(terminal_wealth(market, {x, theta}));
    const double mean = expectation(market, deflated);
    const double scale = std::max(1.0, expectation(market, deflated.cwiseAbs()));
    const double dev = std::abs(mean - x) / scale;
    report.max_deviation = std::max(report.max_deviation, dev);
    if (dev > 1e-9) ++report.failures;
  }
  return report;
}

LogIdentityReport log_optimal_identity(const DiscreteMarket& market, double x) {
  LogIdentityReport report;
  report.solution = optimize(market, UtilitySpec::log(), x);
  const Vec& wealth = report.solution.wealth_star;
  const Vec product = report.solution.sdf.y_T.cwiseProduct(wealth);
  report.max_product_deviation = (product.array() - x).abs().maxCoeff();
  const Vec inv = deflate(market).beta_T.cwiseProduct(wealth).cwiseInverse();
  report.inverse_wealth_deviation = std::abs(x * expectation(market, inv) - 1.0);
  const double tol = 1e-9 * std::max(1.0, x);
  report.holds = report.max_product_deviation <= tol && report.inverse_wealth_deviation <= 1e-9;
  return report;
}

}  // namespace sdfkit
