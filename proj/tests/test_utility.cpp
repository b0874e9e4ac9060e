#include <doctest.h>

#include <cmath>
#include <random>

#include "sdfkit/error.hpp"
#include "sdfkit/ftap.hpp"
#include "sdfkit/utility.hpp"
#include "support/oracles.hpp"

using namespace sdfkit;

namespace {

DiscreteMarket binary() { return make_market({0.5, 0.5}, 1.0, {1.0, 1.0}, {1.0}, {{2.0, 0.5}}); }
DiscreteMarket dominated() { return make_market({0.5, 0.5}, 1.0, {1.0, 1.0}, {1.0}, {{2.0, 1.0}}); }
DiscreteMarket trinomial() {
  return make_market({1.0 / 3, 1.0 / 3, 1.0 - 2.0 / 3}, 1.0, {1.0, 1.0, 1.0}, {1.0}, {{2.0, 1.0, 0.5}});
}

Vec one(double v) {
  Vec out(1);
  out << v;
  return out;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InternalInconsistency;
}

// Root of the scalar log-utility first-order condition E[P v / (x g + theta v)]
// by bisection on the open feasibility interval of theta.
double log_foc_bisection(const DiscreteMarket& m, double x) {
  const Vec v = m.excess_payoffs().row(0).transpose();
  const Vec g = m.growth();
  double lo = -1e300, hi = 1e300;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) > 0) lo = std::max(lo, -x * g(k) / v(k));
    if (v(k) < 0) hi = std::min(hi, -x * g(k) / v(k));
  }
  auto foc = [&](double th) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) s += m.prob()(k) * v(k) / (x * g(k) + th * v(k));
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (foc(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("utility parsing and shape") {
  CHECK(UtilitySpec::parse("log").family() == UtilityFamily::Log);
  CHECK(UtilitySpec::parse("power:gamma=2").parameter() == 2.0);
  CHECK(UtilitySpec::parse("exp:alpha=1").family() == UtilityFamily::Exponential);
  CHECK(code_of([] { UtilitySpec::parse("power:gamma=1"); }) == ErrorCode::InvalidUtility);
  CHECK(code_of([] { UtilitySpec::parse("exp:alpha=-1"); }) == ErrorCode::InvalidUtility);
  CHECK(code_of([] { UtilitySpec::parse("quadratic"); }) == ErrorCode::InvalidUtility);
  for (const auto& u : {UtilitySpec::log(), UtilitySpec::power(0.5), UtilitySpec::power(3.0),
                        UtilitySpec::exponential(2.0)})
    CHECK(check_utility_shape(u));
  CHECK(UtilitySpec::power(2.0).value(2.0) == doctest::Approx(-0.5));
}

TEST_CASE("expected_utility hand values") {
  const DiscreteMarket m = binary();
  auto e = expected_utility(m, UtilitySpec::log(), {1.0, one(0.0)});
  CHECK(e.value == 0.0);
  CHECK(e.gradient(0) == doctest::Approx(0.25));
  e = expected_utility(m, UtilitySpec::log(), {1.0, one(0.5)});
  CHECK(std::abs(e.gradient(0)) <= 1e-12);
  CHECK(code_of([&] { expected_utility(m, UtilitySpec::log(), {1.0, one(2.1)}); }) == ErrorCode::DomainViolation);
}

TEST_CASE("optimize closed forms on the binary market") {
  const DiscreteMarket m = binary();
  const OptimalSolution log_sol = optimize(m, UtilitySpec::log(), 1.0);
  CHECK(log_sol.theta_star(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(log_sol.wealth_star(0) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(log_sol.wealth_star(1) == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(log_sol.sdf.y_T(0) == doctest::Approx(2.0 / 3).epsilon(1e-10));
  CHECK(log_sol.sdf.y_T(1) == doctest::Approx(4.0 / 3).epsilon(1e-10));

  const OptimalSolution exp_sol = optimize(m, UtilitySpec::exponential(1.0), 1.0);
  CHECK(std::abs(exp_sol.theta_star(0) - 2.0 / 3 * std::log(2.0)) <= 1e-10);

  for (const auto& u : {UtilitySpec::log(), UtilitySpec::power(2.0), UtilitySpec::exponential(1.0)})
    CHECK(code_of([&] { optimize(dominated(), u, 1.0); }) == ErrorCode::ArbitrageDetected);
  CHECK(code_of([&] { optimize(m, UtilitySpec::log(), -1.0); }) == ErrorCode::DomainViolation);
}

TEST_CASE("verify_sdf_martingale and the log identity") {
  const DiscreteMarket m = binary();
  const OptimalSolution sol = optimize(m, UtilitySpec::log(), 1.0);
  CHECK(expectation(m, sol.sdf.y_T.cwiseProduct(sol.wealth_star)) == doctest::Approx(1.0));
  CHECK(std::abs(expectation(m, sol.sdf.y_T.cwiseProduct(terminal_wealth(m, {0.0, one(1.0)})))) <= 1e-12);
  CHECK(expectation(m, sol.sdf.y_T.cwiseProduct(terminal_wealth(m, {3.7, one(0.0)}))) == doctest::Approx(3.7));
  const auto rep = verify_sdf_martingale(m, sol.sdf, 500);
  CHECK(rep.failures == 0);

  auto id = log_optimal_identity(m);
  CHECK(id.holds);
  CHECK(id.max_product_deviation <= 1e-12);

  id = log_optimal_identity(trinomial());
  CHECK(id.holds);
  CHECK(id.solution.theta_star(0) == doctest::Approx(log_foc_bisection(trinomial(), 1.0)).epsilon(1e-9));

  const DiscreteMarket none = make_market({0.25, 0.75}, 2.0, {2.5, 3.0}, {}, {});
  id = log_optimal_identity(none);
  CHECK(id.holds);
  CHECK(id.solution.wealth_star(0) == doctest::Approx(1.25));
  CHECK(id.solution.wealth_star(1) == doctest::Approx(1.5));
  CHECK(id.solution.sdf.y_T(0) == doctest::Approx(0.8));
  CHECK(id.solution.sdf.y_T(1) == doctest::Approx(2.0 / 3));
}

TEST_CASE("property: analytic gradient matches central differences") {
  oracle::MarketGen gen(7);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& util : {UtilitySpec::log(), UtilitySpec::power(0.5), UtilitySpec::power(3.0),
                           UtilitySpec::exponential(1.5)}) {
    int checked = 0;
    while (checked < 200) {
      const DiscreteMarket m = gen.random_arbitrage_free(6, 4);
      if (m.num_assets() == 0) continue;
      // zero excess payoff up to rounding: differences cannot see the derivative
      if (m.excess_payoffs().rowwise().lpNorm<Eigen::Infinity>().minCoeff() <=
          1e-12 * std::max(1.0, m.asset_sT().cwiseAbs().maxCoeff()))
        continue;
      Strategy s{1.0 + u(rng) * 0.5 + 0.5, Vec(m.num_assets())};
      for (Eigen::Index i = 0; i < s.theta.size(); ++i) s.theta(i) = 0.2 * u(rng);
      const Vec w = terminal_wealth(m, s);
      if (util.bounded_below_domain() && w.minCoeff() < 0.05) continue;
      const auto e = expected_utility(m, util, s);
      const Mat v = m.excess_payoffs();
      for (Eigen::Index i = 0; i < s.theta.size(); ++i) {
        Strategy up = s, dn = s;
        up.theta(i) += 1e-6;
        dn.theta(i) -= 1e-6;
        const double fd = (expected_utility(m, util, up).value - expected_utility(m, util, dn).value) / 2e-6;
        double magnitude = 0.0;
        for (Eigen::Index k = 0; k < w.size(); ++k)
          magnitude += m.prob()(k) * std::abs(util.first_derivative(w(k)) * v(i, k));
        CHECK(std::abs(fd - e.gradient(i)) <= 1e-5 * magnitude);
      }
      ++checked;
    }
  }
}

TEST_CASE("property: optimal wealth is unique and the SDF is valid") {
  oracle::MarketGen gen(9);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  int complete = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const DiscreteMarket m = gen.random_arbitrage_free(5, 3);
    for (const auto& util : {UtilitySpec::log(), UtilitySpec::power(2.0), UtilitySpec::exponential(1.0)}) {
      const OptimalSolution a = optimize(m, util, 1.0);
      OptimizeOptions opt;
      Vec start(m.num_assets());
      for (Eigen::Index i = 0; i < start.size(); ++i) start(i) = u(rng);
      opt.start = start;
      OptimalSolution b;
      try {
        b = optimize(m, util, 1.0, opt);
      } catch (const Error& e) {
        // random start may leave the domain
        CHECK(e.code() == ErrorCode::DomainViolation);
        continue;
      }
      CHECK((a.wealth_star - b.wealth_star).cwiseAbs().maxCoeff() <= 1e-7);
      CHECK(a.sdf.y_T.minCoeff() > 0.0);
      CHECK(oracle::independent_sdf_check(m, a.sdf.y_T));
      const auto space = sdf_solution_space(m);
      if (space.dimension == 0) {
        ++complete;
        CHECK((a.sdf.y_T - find_sdf(m)->y_T).cwiseAbs().maxCoeff() <= 1e-7);
      }
      const Mat v = m.excess_payoffs();
      const bool full_rank = v.rows() > 0 && Eigen::JacobiSVD<Mat>(v).singularValues().minCoeff() >
                                                  1e-9 * std::max(1.0, v.cwiseAbs().maxCoeff());
      if (full_rank)
        CHECK((a.theta_star - b.theta_star).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
  CHECK(complete > 0);
}

TEST_CASE("property: utility attainment agrees with the LP verdict") {
  oracle::MarketGen gen(13);
  for (int trial = 0; trial < 150; ++trial) {
    const DiscreteMarket m = gen.random_market(5, 3);
    const bool no_arb = ftap_verdict(m).no_arbitrage;
    for (const auto& util : {UtilitySpec::log(), UtilitySpec::exponential(1.0)}) {
      OptimizeOptions opt;
      opt.lp_precheck = false;
      opt.max_iterations = 500;
      bool detected = false;
      try {
        optimize(m, util, 1.0, opt);
      } catch (const Error& e) {
        detected = e.code() == ErrorCode::ArbitrageDetected;
        if (!detected) FAIL_CHECK("unexpected error " << std::string(e.what()));
      }
      CHECK_MESSAGE(detected == !no_arb, "trial " << trial << " " << util.to_string());
    }
  }
}
