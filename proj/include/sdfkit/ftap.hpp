#pragma once

#include <optional>

#include "sdfkit/market.hpp"

namespace sdfkit {

/// Interior tolerance standing in for the strict inequalities Y > 0 and Q > 0.
inline constexpr double kInteriorEpsilon = 1e-9;

/// Candidate stochastic discount factor Y_T over the outcomes (Y_0 = 1).
struct SdfVector {
  Vec y_T;
};

struct RiskNeutralMeasure {
  Vec q;
};

/// Zero-cost strategy with nonnegative, somewhere-positive terminal payoff.
/// The payoff is scaled so that its largest entry is one.
struct ArbitrageCertificate {
  Vec theta;
  Vec payoff;
};

/// Affine description of all solutions to the pricing equations:
/// every SDF is particular + null_basis * z for some z with the result > 0.
struct SdfSolutionSpace {
  SdfVector particular;
  Mat null_basis;  // |Omega| x dimension, orthonormal columns
  std::size_t rank = 0;
  std::size_t dimension = 0;
  double particular_min = 0.0;  // min_omega of the particular solution
};

struct FtapReport {
  bool no_arbitrage = false;
  bool sdf_exists = false;
  bool rn_exists = false;
  std::optional<ArbitrageCertificate> certificate;
  std::optional<SdfVector> sdf;
  std::optional<RiskNeutralMeasure> risk_neutral;
};

/// LP: maximize sum s(omega) s.t. deflated zero-cost gains >= s, 0 <= s <= 1.
std::optional<ArbitrageCertificate> find_arbitrage(const DiscreteMarket& market);

/// LP: maximize t s.t. E[Y S^i_T] = S^i_0 for i = 0..d and Y >= t;
/// returns nullopt when the optimal t is below kInteriorEpsilon.
std::optional<SdfVector> find_sdf(const DiscreteMarket& market);

/// LP over Q directly: sum Q = 1, E^Q[beta_T S^i_T] = S^i_0, Q >= t, maximize t.
std::optional<RiskNeutralMeasure> find_risk_neutral(const DiscreteMarket& market);

/// Throws Error(Infeasible) when no SDF exists.
SdfSolutionSpace sdf_solution_space(const DiscreteMarket& market);

/// Q(omega) = (S0_T / S0_0) Y_T P.
RiskNeutralMeasure sdf_to_risk_neutral(const DiscreteMarket& market, const SdfVector& y);
/// Y_T(omega) = (S0_0 / S0_T) Q / P.
SdfVector risk_neutral_to_sdf(const DiscreteMarket& market, const RiskNeutralMeasure& q);

/// Runs all three LPs and throws InternalInconsistency if they disagree.
FtapReport ftap_verdict(const DiscreteMarket& market);

// Re-verification of returned objects.
double sdf_pricing_residual(const DiscreteMarket& market, const SdfVector& y);
bool is_valid_sdf(const DiscreteMarket& market, const SdfVector& y);
bool is_valid_risk_neutral(const DiscreteMarket& market, const RiskNeutralMeasure& q);
bool is_valid_certificate(const DiscreteMarket& market, const ArbitrageCertificate& cert);

}  // namespace sdfkit
