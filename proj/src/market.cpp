#include "sdfkit/market.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "sdfkit/error.hpp"

namespace sdfkit {

namespace {

constexpr double kProbabilitySumTolerance = 1e-12;

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, what + " is not finite");
}

}  // namespace

Vec DiscreteMarket::growth() const { return baseline_sT_ / baseline_s0_; }

Mat DiscreteMarket::excess_payoffs() const {
  const Vec g = growth();
  Mat v = asset_sT_;
  for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i) -= asset_s0_(i) * g.transpose();
  return v;
}

Mat DiscreteMarket::deflated_gains() const {
  // (S^i_T S0_0 - S^i_0 S0_T) / S0_T cancels exactly when asset i is a
  // multiple of the baseline with representable factors.
  Mat w(asset_sT_.rows(), asset_sT_.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index k = 0; k < w.cols(); ++k)
      w(i, k) = (asset_sT_(i, k) * baseline_s0_ - asset_s0_(i) * baseline_sT_(k)) / baseline_sT_(k);
  return w;
}

Mat DiscreteMarket::pricing_matrix() const {
  const auto n = static_cast<Eigen::Index>(num_outcomes());
  const auto d = static_cast<Eigen::Index>(num_assets());
  Mat a(d + 1, n);
  a.row(0) = prob_.cwiseProduct(baseline_sT_).transpose();
  for (Eigen::Index i = 0; i < d; ++i) a.row(i + 1) = prob_.cwiseProduct(asset_sT_.row(i).transpose()).transpose();
  return a;
}

Vec DiscreteMarket::pricing_rhs() const {
  Vec rhs(num_assets() + 1);
  rhs(0) = baseline_s0_;
  rhs.tail(num_assets()) = asset_s0_;
  return rhs;
}

DiscreteMarket DiscreteMarket::with_asset(const std::string& name, double s0, const Vec& sT) const {
  RawMarket raw = to_raw();
  raw.assets.push_back({name, s0, std::vector<double>(sT.data(), sT.data() + sT.size())});
  return validate_market(raw);
}

RawMarket DiscreteMarket::to_raw() const {
  RawMarket raw;
  raw.outcomes = outcomes_;
  raw.probabilities.assign(prob_.data(), prob_.data() + prob_.size());
  raw.baseline_s0 = baseline_s0_;
  raw.baseline_sT.assign(baseline_sT_.data(), baseline_sT_.data() + baseline_sT_.size());
  for (std::size_t i = 0; i < num_assets(); ++i) {
    RawAsset a;
    a.name = asset_names_[i];
    a.s0 = asset_s0_(static_cast<Eigen::Index>(i));
    const Vec row = asset_sT_.row(static_cast<Eigen::Index>(i)).transpose();
    a.sT.assign(row.data(), row.data() + row.size());
    raw.assets.push_back(std::move(a));
  }
  return raw;
}

DiscreteMarket validate_market(const RawMarket& raw) {
  const std::size_t n = raw.outcomes.size();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "market needs at least one outcome");
  if (std::set<std::string>(raw.outcomes.begin(), raw.outcomes.end()).size() != n)
    throw Error(ErrorCode::InvalidArgument, "outcome labels must be unique");
  if (raw.probabilities.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "probabilities must have one entry per outcome");
  if (raw.baseline_sT.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "baseline sT must have one entry per outcome");
  for (const auto& a : raw.assets) {
    if (a.sT.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "asset '" + a.name + "' sT must have one entry per outcome");
  }

  double sum = 0.0;
  for (double p : raw.probabilities) {
    require_finite(p, "probability");
    if (!(p > 0.0)) throw Error(ErrorCode::NonPositiveProbability, "probabilities must be strictly positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance)
    throw Error(ErrorCode::ProbabilityNotNormalized, "probabilities sum to " + std::to_string(sum));

  require_finite(raw.baseline_s0, "baseline s0");
  if (!(raw.baseline_s0 > 0.0)) throw Error(ErrorCode::NonPositiveBaseline, "baseline s0 must be positive");
  for (double v : raw.baseline_sT) {
    require_finite(v, "baseline sT");
    if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveBaseline, "baseline sT must be positive");
  }

  DiscreteMarket m;
  m.outcomes_ = raw.outcomes;
  m.prob_ = Eigen::Map<const Vec>(raw.probabilities.data(), static_cast<Eigen::Index>(n));
  // Renormalize only when the sum is off by more than accumulated rounding,
  // so validating an already-normalized market leaves every bit unchanged.
  const double rounding = static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  if (std::abs(sum - 1.0) > rounding) m.prob_ /= sum;

  m.baseline_s0_ = raw.baseline_s0;
  m.baseline_sT_ = Eigen::Map<const Vec>(raw.baseline_sT.data(), static_cast<Eigen::Index>(n));

  const auto d = static_cast<Eigen::Index>(raw.assets.size());
  m.asset_s0_.resize(d);
  m.asset_sT_.resize(d, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& a = raw.assets[static_cast<std::size_t>(i)];
    require_finite(a.s0, "asset s0");
    m.asset_names_.push_back(a.name);
    m.asset_s0_(i) = a.s0;
    for (std::size_t k = 0; k < n; ++k) {
      require_finite(a.sT[k], "asset sT");
      m.asset_sT_(i, static_cast<Eigen::Index>(k)) = a.sT[k];
    }
  }
  return m;
}

DiscreteMarket make_market(const std::vector<double>& prob, double baseline_s0,
                           const std::vector<double>& baseline_sT,
                           const std::vector<double>& asset_s0,
                           const std::vector<std::vector<double>>& asset_sT) {
  RawMarket raw;
  for (std::size_t k = 0; k < prob.size(); ++k) raw.outcomes.push_back("w" + std::to_string(k));
  raw.probabilities = prob;
  raw.baseline_s0 = baseline_s0;
  raw.baseline_sT = baseline_sT;
  if (asset_s0.size() != asset_sT.size())
    throw Error(ErrorCode::DimensionMismatch, "asset_s0 and asset_sT disagree on the number of assets");
  for (std::size_t i = 0; i < asset_s0.size(); ++i)
    raw.assets.push_back({"S" + std::to_string(i + 1), asset_s0[i], asset_sT[i]});
  return validate_market(raw);
}

ClaimPayoff make_claim(const DiscreteMarket& market, const std::string& name, const Vec& h_T) {
  if (static_cast<std::size_t>(h_T.size()) != market.num_outcomes())
    throw Error(ErrorCode::DimensionMismatch, "claim payoff must have one entry per outcome");
  for (Eigen::Index k = 0; k < h_T.size(); ++k) require_finite(h_T(k), "claim payoff");
  return {name, h_T};
}

Deflator deflate(const DiscreteMarket& market) {
  return {market.baseline_sT().cwiseInverse() * market.baseline_s0()};
}

namespace {

void check_strategy(const DiscreteMarket& market, const Strategy& strat) {
  if (static_cast<std::size_t>(strat.theta.size()) != market.num_assets())
    throw Error(ErrorCode::DimensionMismatch, "strategy must hold one position per risky asset");
  require_finite(strat.x, "initial capital");
  for (Eigen::Index i = 0; i < strat.theta.size(); ++i) require_finite(strat.theta(i), "strategy position");
}

}  // namespace

Vec terminal_wealth(const DiscreteMarket& market, const Strategy& strat) {
  check_strategy(market, strat);
  Vec w = strat.x * market.growth();
  if (market.num_assets() > 0) w += market.excess_payoffs().transpose() * strat.theta;
  return w;
}

Vec deflated_terminal_wealth(const DiscreteMarket& market, const Strategy& strat) {
  check_strategy(market, strat);
  Vec w = Vec::Constant(static_cast<Eigen::Index>(market.num_outcomes()), strat.x);
  if (market.num_assets() > 0) w += market.deflated_gains().transpose() * strat.theta;
  return w;
}

double expectation(const DiscreteMarket& market, const Vec& v) {
  if (v.size() != market.prob().size())
    throw Error(ErrorCode::DimensionMismatch, "vector is not aligned with the outcomes");
  return market.prob().dot(v);
}

}  // namespace sdfkit
