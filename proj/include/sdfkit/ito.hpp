#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdfkit/market.hpp"
#include "sdfkit/stats.hpp"

namespace sdfkit {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ModelKind { ConstantCoefficients, Bessel3, InverseBessel3 };

std::string model_kind_name(ModelKind kind);

/// Continuous-time market on [0, T] driven by an m-dimensional Brownian motion.
///
/// ConstantCoefficients: dS0/S0 = r dt and dS^i/S^i = b^i dt + <sigma_{.i}, dW>
/// with sigma an m x d matrix. Bessel3 has S0 = 1 and S^1 = |B + (s0, 0, 0)| for
/// a 3-dimensional Brownian motion B; InverseBessel3 is its reciprocal started
/// at s0 (so the underlying Bessel process starts at 1/s0).
struct ItoModelSpec {
  ModelKind kind = ModelKind::ConstantCoefficients;
  double horizon = 1.0;
  double r = 0.0;
  Vec b;
  Mat sigma;
  Vec s0;
  double baseline_s0 = 1.0;
  double bessel_s0 = 1.0;

  static ItoModelSpec constant_coefficients(double r, Vec b, Mat sigma, Vec s0, double horizon,
                                            double baseline_s0 = 1.0);
  static ItoModelSpec bessel3(double horizon, double s0 = 1.0);
  static ItoModelSpec inverse_bessel3(double horizon, double s0 = 1.0);

  Eigen::Index num_assets() const;        // d
  Eigen::Index num_brownians() const;     // m
  Mat covariation() const;                // c = sigma^T sigma
};

/// InvalidModel for bad shapes, r < 0, T <= 0 or d > m; SingularCovariation
/// when the smallest singular value of sigma is <= 1e-10 times the largest.
void validate_model(const ItoModelSpec& model);

/// lambda* = sigma c^-1 (b - r 1), an orthonormal basis of ker(sigma^T), and
/// an optional kernel element kappa (zero unless set through with_kappa).
struct RiskPremium {
  Vec lambda_star;
  Mat kernel_basis;  // m x (m - d)
  Vec kappa;
  double lambda_star_norm2 = 0.0;  // <b - r1, c^-1 (b - r1)>
};

RiskPremium risk_premium_star(const ItoModelSpec& model);

/// Throws KappaNotInKernel if |sigma^T kappa| exceeds 1e-10 (scaled).
RiskPremium with_kappa(const ItoModelSpec& model, RiskPremium rp, const Vec& kappa);

/// pi* = c^-1 (b - r 1).
Vec log_optimal_portfolio(const ItoModelSpec& model);

/// Drift of log X^pi: r + <pi, b - r1> - <pi, c pi> / 2.
double log_wealth_drift(const ItoModelSpec& model, const Vec& pi);

enum class RecordMode { Checkpoints, AllSteps };

struct SimulationOptions {
  RecordMode record = RecordMode::Checkpoints;
  unsigned threads = 1;  // 0 = hardware concurrency
};

/// Simulated paths. Values are stored at the recorded steps only: every step
/// for RecordMode::AllSteps, otherwise t = 0 and the quartiles of [0, T].
struct PathEnsemble {
  ItoModelSpec model;
  std::vector<double> time_grid;             // t_0 = 0 < ... < t_n = T
  std::vector<std::size_t> recorded_steps;   // indices into time_grid
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  RowMat brownian;  // n_paths x (records * m), cumulative W at recorded times
  RowMat prices;    // n_paths x (records * d)
  Vec beta;         // deflator at recorded times

  std::size_t num_records() const { return recorded_steps.size(); }
  std::vector<double> recorded_times() const;
  double w(std::size_t path, std::size_t record, Eigen::Index j) const;
  double price(std::size_t path, std::size_t record, Eigen::Index i) const;
};

/// Constant coefficients: exact log-Euler steps. Bessel kinds: norm of a
/// 3-dimensional Brownian motion. Path p draws from NormalStream(seed, p), so
/// results do not depend on `threads`.
/// Errors: InvalidStepCount, InvalidPathCount, plus validate_model's.
PathEnsemble simulate(const ItoModelSpec& model, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                      const SimulationOptions& options = {});

/// Per-path process values at the ensemble's recorded times.
struct PathValues {
  std::vector<double> times;
  RowMat values;  // n_paths x times.size()
};

PathValues asset_paths(const PathEnsemble& ensemble, Eigen::Index asset);
PathValues baseline_paths(const PathEnsemble& ensemble);
PathValues multiply(const PathValues& a, const PathValues& b);
PathValues reciprocal(const PathValues& a);

/// Wealth of the constant-proportion portfolio pi from unit capital.
PathValues wealth_paths(const PathEnsemble& ensemble, const Vec& pi);

/// Y* = beta exp(-int <lambda*, dW> - 1/2 int |lambda*|^2 dt).
PathValues sdf_star_paths(const PathEnsemble& ensemble, const RiskPremium& rp);

struct ComposedSdf {
  PathValues n_kappa;  // exp(-int <kappa, dW> - 1/2 int |kappa|^2 dt)
  PathValues y;        // Y* N^kappa
};

/// Errors: KappaNotInKernel.
ComposedSdf sdf_compose(const PathEnsemble& ensemble, const RiskPremium& rp);

enum class MartingaleVerdict { ConsistentWithMartingale, SupermartingaleStrict, Inconclusive };

std::string verdict_name(MartingaleVerdict v);

struct MartingaleTestReport {
  std::vector<double> times;
  std::vector<double> means;
  std::vector<double> std_errors;
  std::vector<double> z_scores;
  double initial = 0.0;
  double z_crit = 3.0;
  std::size_t n_paths = 0;
  MartingaleVerdict verdict = MartingaleVerdict::Inconclusive;
};

inline constexpr std::size_t kMinMartingalePaths = 1000;

/// z = (mean - initial) / SE at every recorded time t > 0. The standard error
/// is floored at 1e-12 max(1, |initial|) so that processes equal to the initial
/// value up to round-off get z ~ 0. Verdicts: all |z| <= z_crit ->
/// consistent_with_martingale; some z < -z_crit and none > z_crit ->
/// supermartingale_strict; anything else -> inconclusive.
/// Errors: InsufficientPaths below 1000 paths.
MartingaleTestReport martingale_test(const PathValues& values, double initial, double z_crit = 3.0);

/// Restricts values to the quartile times of their own grid (t = 0 kept).
PathValues at_checkpoints(const PathValues& values);

struct BesselExample1 {
  SampleStats inverse_terminal;       // E[Y_T S0_T] = E[1/S_T]
  double pathwise_product_max_dev = 0.0;  // max |Y_t S^1_t - 1|
  MartingaleTestReport baseline_test;  // Y S0 = 1/S
  MartingaleTestReport asset_test;     // Y S^1 = 1
  double closed_form = 0.0;            // 2 Phi(1/sqrt(T)) - 1
};

struct BesselExample2 {
  SampleStats terminal;  // E[S^1_T]
  double gap = 0.0;      // S^1_0 - E[S^1_T]
  double gap_std_error = 0.0;
  double ci_low = 0.0;   // gap - 3 SE
  double ci_high = 0.0;  // gap + 3 SE
  MartingaleTestReport asset_test;
  double closed_form_gap = 0.0;  // 2 - 2 Phi(1/sqrt(T))
};

struct BesselReport {
  double horizon = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  BesselExample1 example1;
  BesselExample2 example2;
};

BesselExample1 bessel_example1(double horizon, std::size_t n_paths, std::uint64_t seed, std::size_t n_steps = 4,
                               unsigned threads = 1);
BesselExample2 bessel_example2(double horizon, std::size_t n_paths, std::uint64_t seed, std::size_t n_steps = 4,
                               unsigned threads = 1);
BesselReport bessel_counterexamples(double horizon, std::size_t n_paths, std::uint64_t seed,
                                    std::size_t n_steps = 4, unsigned threads = 1);

struct NontradedDrift {
  double drift = 0.0;  // a - <f, lambda*> - <f, kappa>
  bool kappa_invariant = false;
};

/// Drift of dZ = a dt + <f, dW> under the pricing measure built from rp.kappa.
NontradedDrift nontraded_drift(const ItoModelSpec& model, const RiskPremium& rp, double a, const Vec& f);

}  // namespace sdfkit
