#include "sdfkit/ftap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "sdfkit/error.hpp"
#include "sdfkit/lp.hpp"

namespace sdfkit {

namespace {

constexpr double kPricingTolerance = 1e-9;
constexpr double kCertificateNonNegTol = 1e-10;
constexpr double kCertificatePositiveTol = 1e-8;

bool close(double a, double b) { return std::abs(a - b) <= kPricingTolerance * (1.0 + std::abs(b)); }

// Maximize t subject to rows * v = rhs, v >= t, v >= 0. Returns v when t >= eps.
std::optional<Vec> max_min_positive(const Mat& rows, const Vec& rhs) {
  const Eigen::Index n = rows.cols();
  lp::Problem p = lp::Problem::with_variables(n + 1);
  p.objective(n) = 1.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Vec coeff = Vec::Zero(n + 1);
    coeff.head(n) = rows.row(i).transpose();
    p.add_row(coeff, lp::Sense::Equal, rhs(i));
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    Vec coeff = Vec::Zero(n + 1);
    coeff(k) = 1.0;
    coeff(n) = -1.0;
    p.add_row(coeff, lp::Sense::GreaterEqual, 0.0);
  }
  const lp::Solution sol = lp::solve(p);
  if (sol.status == lp::Status::Infeasible) return std::nullopt;
  if (sol.status != lp::Status::Optimal)
    throw Error(ErrorCode::LpNumericalFailure, "max-min positivity LP did not reach an optimum");
  if (sol.x(n) < kInteriorEpsilon) return std::nullopt;
  return Vec(sol.x.head(n));
}

}  // namespace

std::optional<ArbitrageCertificate> find_arbitrage(const DiscreteMarket& market) {
  const auto d = static_cast<Eigen::Index>(market.num_assets());
  const auto n = static_cast<Eigen::Index>(market.num_outcomes());
  if (d == 0) return std::nullopt;

  const Mat gains = market.deflated_gains();
  // Variables: theta (free, d) then s (n, in [0, 1]).
  lp::Problem p = lp::Problem::with_variables(d + n);
  for (Eigen::Index i = 0; i < d; ++i) p.lower(i) = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    p.upper(d + k) = 1.0;
    p.objective(d + k) = 1.0;
    Vec coeff = Vec::Zero(d + n);
    coeff.head(d) = gains.col(k);
    coeff(d + k) = -1.0;
    p.add_row(coeff, lp::Sense::GreaterEqual, 0.0);
  }
  const lp::Solution sol = lp::solve(p);
  if (sol.status != lp::Status::Optimal)
    throw Error(ErrorCode::LpNumericalFailure, "arbitrage LP did not reach an optimum");
  // Scaling theta sets every reachable s(omega) to one, so the optimum is a
  // nonnegative integer: the number of outcomes an arbitrage can pay in.
  if (sol.objective < 0.5) return std::nullopt;

  ArbitrageCertificate cert;
  cert.theta = sol.x.head(d);
  cert.payoff = terminal_wealth(market, {0.0, cert.theta});
  const double top = cert.payoff.maxCoeff();
  if (!(top > 0.0)) throw Error(ErrorCode::LpNumericalFailure, "arbitrage LP returned a non-positive payoff");
  cert.theta /= top;
  cert.payoff = terminal_wealth(market, {0.0, cert.theta});
  if (!is_valid_certificate(market, cert))
    throw Error(ErrorCode::LpNumericalFailure, "arbitrage certificate failed re-verification");
  return cert;
}

std::optional<SdfVector> find_sdf(const DiscreteMarket& market) {
  auto y = max_min_positive(market.pricing_matrix(), market.pricing_rhs());
  if (!y) return std::nullopt;
  SdfVector sdf{*y};
  if (!is_valid_sdf(market, sdf)) throw Error(ErrorCode::LpNumericalFailure, "SDF failed re-verification");
  return sdf;
}

std::optional<RiskNeutralMeasure> find_risk_neutral(const DiscreteMarket& market) {
  const auto d = static_cast<Eigen::Index>(market.num_assets());
  const auto n = static_cast<Eigen::Index>(market.num_outcomes());
  const Vec beta = deflate(market).beta_T;
  Mat rows(d + 1, n);
  Vec rhs(d + 1);
  rows.row(0).setOnes();
  rhs(0) = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    rows.row(i + 1) = beta.cwiseProduct(market.asset_sT().row(i).transpose()).transpose();
    rhs(i + 1) = market.asset_s0()(i);
  }
  auto q = max_min_positive(rows, rhs);
  if (!q) return std::nullopt;
  RiskNeutralMeasure rn{*q};
  if (!is_valid_risk_neutral(market, rn))
    throw Error(ErrorCode::LpNumericalFailure, "risk-neutral measure failed re-verification");
  return rn;
}

SdfSolutionSpace sdf_solution_space(const DiscreteMarket& market) {
  auto particular = find_sdf(market);
  if (!particular) throw Error(ErrorCode::Infeasible, "no stochastic discount factor exists");
  const Mat a = market.pricing_matrix();
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double threshold = 1e-10 * std::max<double>(1.0, static_cast<double>(std::max(a.rows(), a.cols()))) *
                           (sv.size() > 0 ? sv(0) : 0.0);
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > threshold) ++rank;

  SdfSolutionSpace space;
  space.particular = *particular;
  space.rank = rank;
  space.dimension = market.num_outcomes() - rank;
  space.null_basis = svd.matrixV().rightCols(static_cast<Eigen::Index>(space.dimension));
  space.particular_min = particular->y_T.minCoeff();
  return space;
}

RiskNeutralMeasure sdf_to_risk_neutral(const DiscreteMarket& market, const SdfVector& y) {
  if (static_cast<std::size_t>(y.y_T.size()) != market.num_outcomes())
    throw Error(ErrorCode::DimensionMismatch, "SDF is not aligned with the outcomes");
  return {market.growth().cwiseProduct(y.y_T).cwiseProduct(market.prob())};
}

SdfVector risk_neutral_to_sdf(const DiscreteMarket& market, const RiskNeutralMeasure& q) {
  if (static_cast<std::size_t>(q.q.size()) != market.num_outcomes())
    throw Error(ErrorCode::DimensionMismatch, "measure is not aligned with the outcomes");
  return {deflate(market).beta_T.cwiseProduct(q.q).cwiseQuotient(market.prob())};
}

FtapReport ftap_verdict(const DiscreteMarket& market) {
  FtapReport report;
  report.certificate = find_arbitrage(market);
  report.sdf = find_sdf(market);
  report.risk_neutral = find_risk_neutral(market);
  report.no_arbitrage = !report.certificate.has_value();
  report.sdf_exists = report.sdf.has_value();
  report.rn_exists = report.risk_neutral.has_value();
  if (report.no_arbitrage != report.sdf_exists || report.sdf_exists != report.rn_exists)
    throw Error(ErrorCode::InternalInconsistency, "no-arbitrage, SDF and risk-neutral verdicts disagree");
  return report;
}

double sdf_pricing_residual(const DiscreteMarket& market, const SdfVector& y) {
  const Vec lhs = market.pricing_matrix() * y.y_T;
  const Vec rhs = market.pricing_rhs();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < lhs.size(); ++i)
    worst = std::max(worst, std::abs(lhs(i) - rhs(i)) / (1.0 + std::abs(rhs(i))));
  return worst;
}

bool is_valid_sdf(const DiscreteMarket& market, const SdfVector& y) {
  if (static_cast<std::size_t>(y.y_T.size()) != market.num_outcomes()) return false;
  if (!(y.y_T.minCoeff() > 0.0)) return false;
  const Vec lhs = market.pricing_matrix() * y.y_T;
  const Vec rhs = market.pricing_rhs();
  for (Eigen::Index i = 0; i < lhs.size(); ++i)
    if (!close(lhs(i), rhs(i))) return false;
  return true;
}

bool is_valid_risk_neutral(const DiscreteMarket& market, const RiskNeutralMeasure& q) {
  if (static_cast<std::size_t>(q.q.size()) != market.num_outcomes()) return false;
  if (!(q.q.minCoeff() > 0.0)) return false;
  if (std::abs(q.q.sum() - 1.0) > 1e-12 * static_cast<double>(q.q.size())) return false;
  const Vec beta = deflate(market).beta_T;
  for (std::size_t i = 0; i < market.num_assets(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double price = q.q.dot(beta.cwiseProduct(market.asset_sT().row(row).transpose()));
    if (!close(price, market.asset_s0()(row))) return false;
  }
  return true;
}

bool is_valid_certificate(const DiscreteMarket& market, const ArbitrageCertificate& cert) {
  if (static_cast<std::size_t>(cert.theta.size()) != market.num_assets()) return false;
  const Vec payoff = terminal_wealth(market, {0.0, cert.theta});
  return payoff.minCoeff() >= -kCertificateNonNegTol && payoff.maxCoeff() > kCertificatePositiveTol;
}

}  // namespace sdfkit
