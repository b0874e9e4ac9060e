#include "sdfkit/pricing.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "sdfkit/error.hpp"
#include "sdfkit/lp.hpp"

namespace sdfkit {

namespace {

constexpr double kReplicationTolerance = 1e-9;
constexpr double kEpsTolerance = 1e-6;

struct BoundSolve {
  double value = 0.0;
  bool attained = false;
};

// Extremizes E[Y H] over {y >= 0 : pricing equations}; then checks whether
// the optimal face contains a strictly positive y.
BoundSolve extreme_price(const DiscreteMarket& market, const Vec& weights, double sign) {
  const Mat a = market.pricing_matrix();
  const Vec rhs = market.pricing_rhs();
  const Eigen::Index n = a.cols();

  lp::Problem p = lp::Problem::with_variables(n);
  p.objective = sign * weights;
  for (Eigen::Index i = 0; i < a.rows(); ++i) p.add_row(a.row(i).transpose(), lp::Sense::Equal, rhs(i));
  const lp::Solution sol = lp::solve(p);
  if (sol.status != lp::Status::Optimal)
    throw Error(ErrorCode::LpNumericalFailure, "price-bound LP did not reach an optimum");
  BoundSolve out;
  out.value = weights.dot(sol.x);

  lp::Problem face = lp::Problem::with_variables(n + 1);
  face.objective(n) = 1.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Vec coeff = Vec::Zero(n + 1);
    coeff.head(n) = a.row(i).transpose();
    face.add_row(coeff, lp::Sense::Equal, rhs(i));
  }
  Vec fixed = Vec::Zero(n + 1);
  fixed.head(n) = weights;
  face.add_row(fixed, lp::Sense::Equal, out.value);
  for (Eigen::Index k = 0; k < n; ++k) {
    Vec coeff = Vec::Zero(n + 1);
    coeff(k) = 1.0;
    coeff(n) = -1.0;
    face.add_row(coeff, lp::Sense::GreaterEqual, 0.0);
  }
  const lp::Solution inner = lp::solve(face);
  out.attained = inner.status == lp::Status::Optimal && inner.x(n) >= kInteriorEpsilon;
  return out;
}

}  // namespace

ReplicationResult replication_check(const DiscreteMarket& market, const ClaimPayoff& claim) {
  if (static_cast<std::size_t>(claim.h_T.size()) != market.num_outcomes())
    throw Error(ErrorCode::DimensionMismatch, "claim payoff must have one entry per outcome");
  const auto n = static_cast<Eigen::Index>(market.num_outcomes());
  const auto d = static_cast<Eigen::Index>(market.num_assets());
  // Columns: growth of one unit of capital, then excess payoff per unit of asset i.
  Mat design(n, d + 1);
  design.col(0) = market.growth();
  if (d > 0) design.rightCols(d) = market.excess_payoffs().transpose();
  const Eigen::CompleteOrthogonalDecomposition<Mat> cod(design);
  const Vec coef = cod.solve(claim.h_T);

  ReplicationResult out;
  out.x = coef(0);
  out.theta = coef.tail(d);
  out.residual = (design * coef - claim.h_T).lpNorm<Eigen::Infinity>();
  out.replicable = out.residual <= kReplicationTolerance;
  return out;
}

PriceInterval price_bounds(const DiscreteMarket& market, const ClaimPayoff& claim) {
  if (static_cast<std::size_t>(claim.h_T.size()) != market.num_outcomes())
    throw Error(ErrorCode::DimensionMismatch, "claim payoff must have one entry per outcome");
  if (!find_sdf(market)) throw Error(ErrorCode::ArbitrageDetected, "price bounds need an arbitrage-free market");

  const Vec weights = market.prob().cwiseProduct(claim.h_T);
  const BoundSolve hi = extreme_price(market, weights, 1.0);
  const BoundSolve lo = extreme_price(market, weights, -1.0);
  const ReplicationResult rep = replication_check(market, claim);

  PriceInterval out;
  out.lower = lo.value;
  out.upper = hi.value;
  out.lower_attained = lo.attained;
  out.upper_attained = hi.attained;
  out.replicable = rep.replicable;
  if (out.replicable) {
    if (std::abs(out.upper - out.lower) > 1e-9 * (1.0 + std::abs(out.upper)) || !out.lower_attained ||
        !out.upper_attained)
      throw Error(ErrorCode::InternalInconsistency, "replicable claim with a non-degenerate price interval");
  }
  if (out.lower > out.upper) std::swap(out.lower, out.upper);
  return out;
}

IndifferencePrice indifference_price(const DiscreteMarket& market, const UtilitySpec& u, double x,
                                     const ClaimPayoff& claim) {
  if (static_cast<std::size_t>(claim.h_T.size()) != market.num_outcomes())
    throw Error(ErrorCode::DimensionMismatch, "claim payoff must have one entry per outcome");
  const OptimalSolution base = optimize(market, u, x);

  IndifferencePrice out;
  out.sdf = base.sdf;
  out.price = expectation(market, base.sdf.y_T.cwiseProduct(claim.h_T));

  // Extended market: the claim becomes asset d+1 traded at the indifference price.
  const DiscreteMarket extended = market.with_asset(claim.name.empty() ? "claim" : claim.name, out.price, claim.h_T);
  OptimizeOptions opts;
  opts.lp_precheck = false;
  const OptimalSolution ext = optimize(extended, u, x, opts);
  out.eps_star = ext.theta_star(ext.theta_star.size() - 1);
  out.eps_unique = !replication_check(market, claim).replicable;
  if (out.eps_unique) {
    out.verified = std::abs(out.eps_star) <= kEpsTolerance;
  } else {
    out.wealth_gap = (ext.wealth_star - base.wealth_star).lpNorm<Eigen::Infinity>();
    out.verified = out.wealth_gap <= kEpsTolerance * std::max(1.0, std::abs(x));
  }
  if (!out.verified)
    throw Error(ErrorCode::InternalInconsistency, "claim position at the indifference price is not zero");
  return out;
}

std::vector<double> indifference_prices(const DiscreteMarket& market, const UtilitySpec& u, double x,
                                        const std::vector<ClaimPayoff>& claims) {
  const OptimalSolution base = optimize(market, u, x);
  std::vector<double> prices;
  prices.reserve(claims.size());
  for (const auto& c : claims) {
    if (static_cast<std::size_t>(c.h_T.size()) != market.num_outcomes())
      throw Error(ErrorCode::DimensionMismatch, "claim payoff must have one entry per outcome");
    prices.push_back(expectation(market, base.sdf.y_T.cwiseProduct(c.h_T)));
  }
  return prices;
}

StatePriceDensity state_prices(const DiscreteMarket& market, const SdfVector& y) {
  if (static_cast<std::size_t>(y.y_T.size()) != market.num_outcomes())
    throw Error(ErrorCode::DimensionMismatch, "SDF is not aligned with the outcomes");
  return {y.y_T.cwiseProduct(market.prob())};
}

CovarianceDecomposition covariance_decomposition(const DiscreteMarket& market, const SdfVector& y,
                                                 const ClaimPayoff& claim, double r, double horizon) {
  if (static_cast<std::size_t>(y.y_T.size()) != market.num_outcomes() ||
      static_cast<std::size_t>(claim.h_T.size()) != market.num_outcomes())
    throw Error(ErrorCode::DimensionMismatch, "SDF and claim must be aligned with the outcomes");
  const double gross = 1.0 + r * horizon;
  const double tol = 1e-12;
  bool constant_rate = std::abs(market.baseline_s0() - 1.0) <= tol;
  for (Eigen::Index k = 0; k < market.baseline_sT().size(); ++k)
    constant_rate = constant_rate && std::abs(market.baseline_sT()(k) - gross) <= tol * gross;
  if (!constant_rate)
    throw Error(ErrorCode::BaselineNotConstantRate, "baseline must satisfy S0_0 = 1 and S0_T = 1 + rT");

  const double mean_h = expectation(market, claim.h_T);
  const double mean_y = expectation(market, y.y_T);
  CovarianceDecomposition out;
  out.rn_term = mean_h / gross;
  out.cov_term = expectation(market, y.y_T.cwiseProduct(claim.h_T)) - mean_y * mean_h;
  out.total = out.rn_term + out.cov_term;
  return out;
}

}  // namespace sdfkit
