#pragma once

#include <vector>

#include "sdfkit/ftap.hpp"
#include "sdfkit/market.hpp"
#include "sdfkit/utility.hpp"

namespace sdfkit {

/// Closure of the arbitrage-free price set {E[Y_T H_T] : Y an SDF}.
/// For a claim that cannot be replicated the set itself is the open interval
/// (lower, upper); the *_attained flags say whether an endpoint is reached by
/// a strictly positive SDF.
struct PriceInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_attained = false;
  bool upper_attained = false;
  bool replicable = false;
};

struct ReplicationResult {
  bool replicable = false;
  double x = 0.0;
  Vec theta;
  double residual = 0.0;  // sup-norm of X_T^{(x;theta)} - H_T
};

struct StatePriceDensity {
  Vec p;
};

struct CovarianceDecomposition {
  double rn_term = 0.0;   // E[H] / (1 + rT)
  double cov_term = 0.0;  // cov(Y, H)
  double total = 0.0;
};

struct IndifferencePrice {
  double price = 0.0;
  SdfVector sdf;  // Y_T from the utility optimum; the same for every claim
  /// Optimal claim position when the claim is added as a traded asset at
  /// `price`. Only meaningful when the claim is not replicable; otherwise the
  /// optimal position is not unique and the check compares optimal wealths.
  double eps_star = 0.0;
  bool eps_unique = true;
  double wealth_gap = 0.0;  // sup |X*_extended - X*| when !eps_unique
  bool verified = false;
};

/// Errors: ArbitrageDetected.
PriceInterval price_bounds(const DiscreteMarket& market, const ClaimPayoff& claim);

/// Least-squares fit of (x, theta) to H_T; replicable iff residual <= 1e-9.
ReplicationResult replication_check(const DiscreteMarket& market, const ClaimPayoff& claim);

/// H_0 = E[Y_T H_T] with Y_T from the expected-utility optimum, verified by
/// re-optimizing with the claim added at that price (|eps*| <= 1e-6).
/// Errors: ArbitrageDetected, DomainViolation, MaxIterationsExceeded.
IndifferencePrice indifference_price(const DiscreteMarket& market, const UtilitySpec& u, double x,
                                     const ClaimPayoff& claim);

/// Prices a batch of claims with a single utility optimization.
std::vector<double> indifference_prices(const DiscreteMarket& market, const UtilitySpec& u, double x,
                                        const std::vector<ClaimPayoff>& claims);

StatePriceDensity state_prices(const DiscreteMarket& market, const SdfVector& y);

/// H_0 = (1 + rT)^-1 E[H_T] + cov(Y_T, H_T). Requires S0_0 = 1 and
/// S0_T = 1 + rT in every outcome (BaselineNotConstantRate otherwise).
CovarianceDecomposition covariance_decomposition(const DiscreteMarket& market, const SdfVector& y,
                                                 const ClaimPayoff& claim, double r, double horizon);

}  // namespace sdfkit
