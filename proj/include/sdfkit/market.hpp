#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdfkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Unvalidated market description, as read from a market file.
struct RawAsset {
  std::string name;
  double s0 = 0.0;
  std::vector<double> sT;
};

struct RawMarket {
  std::vector<std::string> outcomes;
  std::vector<double> probabilities;
  double baseline_s0 = 1.0;
  std::vector<double> baseline_sT;
  std::vector<RawAsset> assets;
};

/// One-period market on a finite outcome space.
///
/// Asset 0 is the baseline asset; it is any strictly positive asset, not
/// necessarily a bond. Risky assets are indexed 1..d in the literature and
/// 0..d-1 here. Instances can only be obtained from validate_market(), so
/// every live object satisfies the invariants:
///   - probabilities strictly positive and summing to one,
///   - baseline prices strictly positive,
///   - payoff arrays aligned with the outcome list.
class DiscreteMarket {
 public:
  std::size_t num_outcomes() const { return outcomes_.size(); }
  std::size_t num_assets() const { return asset_names_.size(); }

  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<std::string>& asset_names() const { return asset_names_; }
  const Vec& prob() const { return prob_; }
  double baseline_s0() const { return baseline_s0_; }
  const Vec& baseline_sT() const { return baseline_sT_; }
  const Vec& asset_s0() const { return asset_s0_; }
  /// d x |Omega|; row i holds the time-T payoffs of risky asset i.
  const Mat& asset_sT() const { return asset_sT_; }

  /// S0_T / S0_0, the gross growth of the baseline asset per outcome.
  Vec growth() const;

  /// d x |Omega| matrix of S^i_T - (S0_T/S0_0) S^i_0.
  Mat excess_payoffs() const;

  /// d x |Omega| matrix of beta_T S^i_T - S^i_0 (zero-cost deflated gains).
  Mat deflated_gains() const;

  /// (d+1) x |Omega| matrix with row i equal to P * S^i_T, row 0 the baseline.
  /// An SDF y is exactly a positive solution of pricing_matrix() * y = pricing_rhs().
  Mat pricing_matrix() const;
  Vec pricing_rhs() const;

  /// Copy of this market with one more risky asset appended.
  DiscreteMarket with_asset(const std::string& name, double s0, const Vec& sT) const;

  RawMarket to_raw() const;

 private:
  friend DiscreteMarket validate_market(const RawMarket& raw);
  DiscreteMarket() = default;

  std::vector<std::string> outcomes_;
  std::vector<std::string> asset_names_;
  Vec prob_;
  double baseline_s0_ = 1.0;
  Vec baseline_sT_;
  Vec asset_s0_;
  Mat asset_sT_;
};

struct Deflator {
  Vec beta_T;
};

struct Strategy {
  double x = 0.0;
  Vec theta;
};

struct ClaimPayoff {
  std::string name;
  Vec h_T;
};

/// Throws Error with NonPositiveProbability, ProbabilityNotNormalized,
/// NonPositiveBaseline or DimensionMismatch.
DiscreteMarket validate_market(const RawMarket& raw);

/// Builds a market from plain arrays; outcome and asset labels are generated.
DiscreteMarket make_market(const std::vector<double>& prob, double baseline_s0,
                           const std::vector<double>& baseline_sT,
                           const std::vector<double>& asset_s0,
                           const std::vector<std::vector<double>>& asset_sT);

ClaimPayoff make_claim(const DiscreteMarket& market, const std::string& name, const Vec& h_T);

Deflator deflate(const DiscreteMarket& market);

/// X_T(omega) = x S0_T/S0_0 + sum_i theta^i (S^i_T - (S0_T/S0_0) S^i_0).
Vec terminal_wealth(const DiscreteMarket& market, const Strategy& strat);

/// beta_T X_T = x + sum_i theta^i (beta_T S^i_T - S^i_0).
Vec deflated_terminal_wealth(const DiscreteMarket& market, const Strategy& strat);

/// E^P[v] for a vector aligned with the outcomes.
double expectation(const DiscreteMarket& market, const Vec& v);

}  // namespace sdfkit
