#include "sdfkit/ito.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sdfkit/error.hpp"
#include "sdfkit/random.hpp"

namespace sdfkit {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kKernelTolerance = 1e-10;

bool is_constant(const ItoModelSpec& model) { return model.kind == ModelKind::ConstantCoefficients; }

void require_constant(const ItoModelSpec& model, const char* what) {
  if (!is_constant(model))
    throw Error(ErrorCode::InvalidModel, std::string(what) + " requires a constant-coefficient model");
}

std::vector<std::size_t> quartile_indices(std::size_t last) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k <= 4; ++k) {
    const std::size_t i = (k * last + 2) / 4;
    if (idx.empty() || idx.back() != i) idx.push_back(i);
  }
  return idx;
}

PathValues empty_like(const PathEnsemble& e) {
  PathValues out;
  out.times = e.recorded_times();
  out.values.resize(static_cast<Eigen::Index>(e.n_paths), static_cast<Eigen::Index>(e.num_records()));
  return out;
}

// exp(a t + <v, W_t>) at every recorded time.
PathValues exponential_linear(const PathEnsemble& e, double scale, double a, const Vec& v) {
  PathValues out = empty_like(e);
  const Eigen::Index m = e.model.num_brownians();
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    for (std::size_t k = 0; k < e.num_records(); ++k) {
      double expo = a * out.times[k];
      for (Eigen::Index j = 0; j < m; ++j) expo += v(j) * e.w(p, k, j);
      out.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = scale * std::exp(expo);
    }
  }
  return out;
}

void simulate_range(const PathEnsemble& e, RowMat& brownian, RowMat& prices, std::size_t begin, std::size_t end) {
  const ItoModelSpec& model = e.model;
  const Eigen::Index m = model.num_brownians();
  const Eigen::Index d = model.num_assets();
  const std::size_t n_steps = e.time_grid.size() - 1;

  Vec drift;
  if (is_constant(model)) {
    const Mat c = model.covariation();
    drift = model.b - 0.5 * c.diagonal();
  }
  const double anchor = model.kind == ModelKind::InverseBessel3 ? 1.0 / model.bessel_s0 : model.bessel_s0;

  Vec w(m);
  Vec sw(d);
  for (std::size_t p = begin; p < end; ++p) {
    NormalStream rng(e.seed, p);
    w.setZero();
    std::size_t rec = 0;
    for (std::size_t step = 0; step <= n_steps; ++step) {
      if (step > 0) {
        const double dt = e.time_grid[step] - e.time_grid[step - 1];
        const double sd = std::sqrt(dt);
        for (Eigen::Index j = 0; j < m; ++j) w(j) += sd * rng.next();
      }
      if (rec >= e.recorded_steps.size() || e.recorded_steps[rec] != step) continue;
      const auto row = static_cast<Eigen::Index>(p);
      for (Eigen::Index j = 0; j < m; ++j) brownian(row, static_cast<Eigen::Index>(rec) * m + j) = w(j);
      const double t = e.time_grid[step];
      if (is_constant(model)) {
        sw.noalias() = model.sigma.transpose() * w;
        for (Eigen::Index i = 0; i < d; ++i)
          prices(row, static_cast<Eigen::Index>(rec) * d + i) = model.s0(i) * std::exp(drift(i) * t + sw(i));
      } else {
        const double x = w(0) + anchor;
        const double radius = std::sqrt(x * x + w(1) * w(1) + w(2) * w(2));
        prices(row, static_cast<Eigen::Index>(rec)) = model.kind == ModelKind::Bessel3 ? radius : 1.0 / radius;
      }
      ++rec;
    }
  }
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ConstantCoefficients: return "constant_coefficients";
    case ModelKind::Bessel3: return "bessel3";
    case ModelKind::InverseBessel3: return "inverse_bessel3";
  }
  return "unknown";
}

ItoModelSpec ItoModelSpec::constant_coefficients(double r, Vec b, Mat sigma, Vec s0, double horizon,
                                                 double baseline_s0) {
  ItoModelSpec m;
  m.kind = ModelKind::ConstantCoefficients;
  m.r = r;
  m.b = std::move(b);
  m.sigma = std::move(sigma);
  m.s0 = std::move(s0);
  m.horizon = horizon;
  m.baseline_s0 = baseline_s0;
  return m;
}

ItoModelSpec ItoModelSpec::bessel3(double horizon, double s0) {
  ItoModelSpec m;
  m.kind = ModelKind::Bessel3;
  m.horizon = horizon;
  m.bessel_s0 = s0;
  return m;
}

ItoModelSpec ItoModelSpec::inverse_bessel3(double horizon, double s0) {
  ItoModelSpec m = bessel3(horizon, s0);
  m.kind = ModelKind::InverseBessel3;
  return m;
}

Eigen::Index ItoModelSpec::num_assets() const { return is_constant(*this) ? b.size() : 1; }

Eigen::Index ItoModelSpec::num_brownians() const { return is_constant(*this) ? sigma.rows() : 3; }

Mat ItoModelSpec::covariation() const { return sigma.transpose() * sigma; }

void validate_model(const ItoModelSpec& model) {
  if (!(model.horizon > 0.0) || !std::isfinite(model.horizon))
    throw Error(ErrorCode::InvalidModel, "horizon T must be positive");
  if (!is_constant(model)) {
    if (!(model.bessel_s0 > 0.0) || !std::isfinite(model.bessel_s0))
      throw Error(ErrorCode::InvalidModel, "Bessel s0 must be positive");
    return;
  }
  const Eigen::Index d = model.b.size();
  const Eigen::Index m = model.sigma.rows();
  if (d == 0) throw Error(ErrorCode::InvalidModel, "at least one risky asset is required");
  if (model.sigma.cols() != d || model.s0.size() != d)
    throw Error(ErrorCode::InvalidModel, "sigma must be m x d with d = len(b) = len(s0)");
  if (d > m) throw Error(ErrorCode::InvalidModel, "need d <= m (at least as many Brownian motions as assets)");
  if (!(model.r >= 0.0) || !std::isfinite(model.r)) throw Error(ErrorCode::InvalidModel, "r must be >= 0");
  if (!(model.baseline_s0 > 0.0)) throw Error(ErrorCode::NonPositiveBaseline, "baseline_s0 must be positive");
  if (!model.b.allFinite() || !model.sigma.allFinite())
    throw Error(ErrorCode::InvalidModel, "coefficients must be finite");
  if (!(model.s0.array() > 0.0).all()) throw Error(ErrorCode::InvalidModel, "s0 must be positive");
  const Eigen::JacobiSVD<Mat> svd(model.sigma);
  const Vec& sv = svd.singularValues();
  if (!(sv(d - 1) > kRankTolerance * sv(0)))
    throw Error(ErrorCode::SingularCovariation, "c = sigma^T sigma does not have full rank");
}

RiskPremium risk_premium_star(const ItoModelSpec& model) {
  require_constant(model, "risk_premium_star");
  validate_model(model);
  const Eigen::Index d = model.num_assets();
  const Eigen::Index m = model.num_brownians();
  const Vec excess = model.b - model.r * Vec::Ones(d);
  const Vec z = model.covariation().ldlt().solve(excess);

  RiskPremium rp;
  rp.lambda_star = model.sigma * z;
  rp.lambda_star_norm2 = excess.dot(z);
  rp.kappa = Vec::Zero(m);
  const double direct = rp.lambda_star.squaredNorm();
  if (std::abs(direct - rp.lambda_star_norm2) > 1e-8 * std::max(1.0, direct))
    throw Error(ErrorCode::InternalInconsistency, "|lambda*|^2 cross-check failed");

  const Eigen::JacobiSVD<Mat> svd(model.sigma, Eigen::ComputeFullU);
  rp.kernel_basis = svd.matrixU().rightCols(m - d);
  return rp;
}

RiskPremium with_kappa(const ItoModelSpec& model, RiskPremium rp, const Vec& kappa) {
  require_constant(model, "with_kappa");
  if (kappa.size() != model.num_brownians())
    throw Error(ErrorCode::DimensionMismatch, "kappa must have m entries");
  const double leak = (model.sigma.transpose() * kappa).lpNorm<Eigen::Infinity>();
  if (leak > kKernelTolerance * std::max(1.0, kappa.lpNorm<Eigen::Infinity>()))
    throw Error(ErrorCode::KappaNotInKernel, "sigma^T kappa != 0");
  rp.kappa = kappa;
  return rp;
}

Vec log_optimal_portfolio(const ItoModelSpec& model) {
  require_constant(model, "log_optimal_portfolio");
  validate_model(model);
  return model.covariation().ldlt().solve(model.b - model.r * Vec::Ones(model.num_assets()));
}

double log_wealth_drift(const ItoModelSpec& model, const Vec& pi) {
  require_constant(model, "log_wealth_drift");
  if (pi.size() != model.num_assets()) throw Error(ErrorCode::DimensionMismatch, "pi must have d entries");
  const Vec excess = model.b - model.r * Vec::Ones(model.num_assets());
  return model.r + pi.dot(excess) - 0.5 * pi.dot(model.covariation() * pi);
}

std::vector<double> PathEnsemble::recorded_times() const {
  std::vector<double> out;
  out.reserve(recorded_steps.size());
  for (std::size_t s : recorded_steps) out.push_back(time_grid[s]);
  return out;
}

double PathEnsemble::w(std::size_t path, std::size_t record, Eigen::Index j) const {
  return brownian(static_cast<Eigen::Index>(path),
                  static_cast<Eigen::Index>(record) * model.num_brownians() + j);
}

double PathEnsemble::price(std::size_t path, std::size_t record, Eigen::Index i) const {
  return prices(static_cast<Eigen::Index>(path), static_cast<Eigen::Index>(record) * model.num_assets() + i);
}

PathEnsemble simulate(const ItoModelSpec& model, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                      const SimulationOptions& options) {
  if (n_steps == 0) throw Error(ErrorCode::InvalidStepCount, "n_steps must be >= 1");
  if (n_paths == 0) throw Error(ErrorCode::InvalidPathCount, "n_paths must be >= 1");
  validate_model(model);

  PathEnsemble e;
  e.model = model;
  e.seed = seed;
  e.n_paths = n_paths;
  e.time_grid.resize(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k)
    e.time_grid[k] = model.horizon * static_cast<double>(k) / static_cast<double>(n_steps);
  if (options.record == RecordMode::AllSteps) {
    for (std::size_t k = 0; k <= n_steps; ++k) e.recorded_steps.push_back(k);
  } else {
    e.recorded_steps = quartile_indices(n_steps);
  }

  const auto records = static_cast<Eigen::Index>(e.num_records());
  const auto rows = static_cast<Eigen::Index>(n_paths);
  e.brownian.resize(rows, records * model.num_brownians());
  e.prices.resize(rows, records * model.num_assets());
  e.beta.resize(records);
  for (Eigen::Index k = 0; k < records; ++k)
    e.beta(k) = is_constant(model) ? std::exp(-model.r * e.time_grid[e.recorded_steps[k]]) : 1.0;

  std::size_t workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  workers = std::min(workers, n_paths);
  if (workers <= 1) {
    simulate_range(e, e.brownian, e.prices, 0, n_paths);
    return e;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n_paths + workers - 1) / workers;
  for (std::size_t wk = 0; wk < workers; ++wk) {
    const std::size_t begin = wk * chunk;
    const std::size_t end = std::min(n_paths, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&e, begin, end] { simulate_range(e, e.brownian, e.prices, begin, end); });
  }
  for (auto& t : pool) t.join();
  return e;
}

PathValues asset_paths(const PathEnsemble& ensemble, Eigen::Index asset) {
  if (asset < 0 || asset >= ensemble.model.num_assets())
    throw Error(ErrorCode::DimensionMismatch, "asset index out of range");
  PathValues out = empty_like(ensemble);
  for (std::size_t p = 0; p < ensemble.n_paths; ++p)
    for (std::size_t k = 0; k < ensemble.num_records(); ++k)
      out.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = ensemble.price(p, k, asset);
  return out;
}

PathValues baseline_paths(const PathEnsemble& ensemble) {
  PathValues out = empty_like(ensemble);
  const double s0 = is_constant(ensemble.model) ? ensemble.model.baseline_s0 : 1.0;
  for (std::size_t k = 0; k < ensemble.num_records(); ++k)
    out.values.col(static_cast<Eigen::Index>(k)).setConstant(s0 / ensemble.beta(static_cast<Eigen::Index>(k)));
  return out;
}

PathValues multiply(const PathValues& a, const PathValues& b) {
  if (a.times != b.times || a.values.rows() != b.values.rows())
    throw Error(ErrorCode::DimensionMismatch, "path values live on different grids");
  PathValues out{a.times, a.values.cwiseProduct(b.values)};
  return out;
}

PathValues reciprocal(const PathValues& a) {
  PathValues out{a.times, a.values.cwiseInverse()};
  return out;
}

PathValues wealth_paths(const PathEnsemble& ensemble, const Vec& pi) {
  require_constant(ensemble.model, "wealth_paths");
  if (pi.size() != ensemble.model.num_assets()) throw Error(ErrorCode::DimensionMismatch, "pi must have d entries");
  if (!pi.allFinite()) throw Error(ErrorCode::InvalidArgument, "pi must be finite");
  const Vec vol = ensemble.model.sigma * pi;
  return exponential_linear(ensemble, 1.0, log_wealth_drift(ensemble.model, pi), vol);
}

PathValues sdf_star_paths(const PathEnsemble& ensemble, const RiskPremium& rp) {
  require_constant(ensemble.model, "sdf_star_paths");
  if (rp.lambda_star.size() != ensemble.model.num_brownians())
    throw Error(ErrorCode::DimensionMismatch, "lambda* must have m entries");
  const double a = -ensemble.model.r - 0.5 * rp.lambda_star.squaredNorm();
  return exponential_linear(ensemble, 1.0, a, -rp.lambda_star);
}

ComposedSdf sdf_compose(const PathEnsemble& ensemble, const RiskPremium& rp) {
  require_constant(ensemble.model, "sdf_compose");
  const Vec kappa = rp.kappa.size() == 0 ? Vec::Zero(ensemble.model.num_brownians()) : rp.kappa;
  with_kappa(ensemble.model, rp, kappa);
  ComposedSdf out;
  out.n_kappa = exponential_linear(ensemble, 1.0, -0.5 * kappa.squaredNorm(), -kappa);
  out.y = multiply(sdf_star_paths(ensemble, rp), out.n_kappa);
  return out;
}

std::string verdict_name(MartingaleVerdict v) {
  switch (v) {
    case MartingaleVerdict::ConsistentWithMartingale: return "consistent_with_martingale";
    case MartingaleVerdict::SupermartingaleStrict: return "supermartingale_strict";
    case MartingaleVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

MartingaleTestReport martingale_test(const PathValues& values, double initial, double z_crit) {
  const auto n = static_cast<std::size_t>(values.values.rows());
  if (n < kMinMartingalePaths)
    throw Error(ErrorCode::InsufficientPaths, "martingale test needs at least 1000 paths, got " + std::to_string(n));
  if (static_cast<std::size_t>(values.values.cols()) != values.times.size())
    throw Error(ErrorCode::DimensionMismatch, "times and value columns disagree");

  MartingaleTestReport rep;
  rep.initial = initial;
  rep.z_crit = z_crit;
  rep.n_paths = n;
  const double floor = 1e-12 * std::max(1.0, std::abs(initial));
  std::vector<double> column(n);
  bool any_high = false, any_low = false;
  for (std::size_t k = 0; k < values.times.size(); ++k) {
    if (!(values.times[k] > 0.0)) continue;
    for (std::size_t p = 0; p < n; ++p)
      column[p] = values.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
    const SampleStats s = sample_stats(column);
    const double z = (s.mean - initial) / std::max(s.std_error, floor);
    rep.times.push_back(values.times[k]);
    rep.means.push_back(s.mean);
    rep.std_errors.push_back(s.std_error);
    rep.z_scores.push_back(z);
    any_high = any_high || z > z_crit;
    any_low = any_low || z < -z_crit;
  }
  if (!any_high && !any_low)
    rep.verdict = MartingaleVerdict::ConsistentWithMartingale;
  else if (any_low && !any_high)
    rep.verdict = MartingaleVerdict::SupermartingaleStrict;
  else
    rep.verdict = MartingaleVerdict::Inconclusive;
  return rep;
}

PathValues at_checkpoints(const PathValues& values) {
  if (values.times.empty()) return values;
  const auto idx = quartile_indices(values.times.size() - 1);
  PathValues out;
  out.values.resize(values.values.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.times.push_back(values.times[idx[k]]);
    out.values.col(static_cast<Eigen::Index>(k)) = values.values.col(static_cast<Eigen::Index>(idx[k]));
  }
  return out;
}

namespace {

std::vector<double> terminal_column(const PathValues& v) {
  const Eigen::Index last = v.values.cols() - 1;
  std::vector<double> out(static_cast<std::size_t>(v.values.rows()));
  for (Eigen::Index p = 0; p < v.values.rows(); ++p) out[static_cast<std::size_t>(p)] = v.values(p, last);
  return out;
}

}  // namespace

BesselExample1 bessel_example1(double horizon, std::size_t n_paths, std::uint64_t seed, std::size_t n_steps,
                               unsigned threads) {
  const PathEnsemble e =
      simulate(ItoModelSpec::bessel3(horizon), n_steps, n_paths, seed, {RecordMode::Checkpoints, threads});
  const PathValues s = asset_paths(e, 0);
  const PathValues y = reciprocal(s);
  const PathValues ys = multiply(y, s);

  BesselExample1 ex;
  ex.inverse_terminal = sample_stats(terminal_column(y));
  ex.pathwise_product_max_dev = (ys.values.array() - 1.0).abs().maxCoeff();
  ex.baseline_test = martingale_test(multiply(y, baseline_paths(e)), 1.0);
  ex.asset_test = martingale_test(ys, 1.0);
  ex.closed_form = std::erf(1.0 / std::sqrt(2.0 * horizon));
  return ex;
}

BesselExample2 bessel_example2(double horizon, std::size_t n_paths, std::uint64_t seed, std::size_t n_steps,
                               unsigned threads) {
  const PathEnsemble e =
      simulate(ItoModelSpec::inverse_bessel3(horizon), n_steps, n_paths, seed, {RecordMode::Checkpoints, threads});
  const PathValues s = asset_paths(e, 0);

  BesselExample2 ex;
  ex.terminal = sample_stats(terminal_column(s));
  ex.gap = 1.0 - ex.terminal.mean;
  ex.gap_std_error = ex.terminal.std_error;
  ex.ci_low = ex.gap - 3.0 * ex.gap_std_error;
  ex.ci_high = ex.gap + 3.0 * ex.gap_std_error;
  ex.asset_test = martingale_test(s, 1.0);
  ex.closed_form_gap = 1.0 - std::erf(1.0 / std::sqrt(2.0 * horizon));
  return ex;
}

BesselReport bessel_counterexamples(double horizon, std::size_t n_paths, std::uint64_t seed, std::size_t n_steps,
                                    unsigned threads) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidModel, "horizon T must be positive");
  BesselReport rep;
  rep.horizon = horizon;
  rep.n_paths = n_paths;
  rep.seed = seed;
  rep.example1 = bessel_example1(horizon, n_paths, seed, n_steps, threads);
  rep.example2 = bessel_example2(horizon, n_paths, seed, n_steps, threads);
  return rep;
}

NontradedDrift nontraded_drift(const ItoModelSpec& model, const RiskPremium& rp, double a, const Vec& f) {
  require_constant(model, "nontraded_drift");
  const Eigen::Index m = model.num_brownians();
  if (f.size() != m || rp.lambda_star.size() != m) throw Error(ErrorCode::DimensionMismatch, "f must have m entries");
  const Vec kappa = rp.kappa.size() == 0 ? Vec::Zero(m) : rp.kappa;
  if (kappa.size() != m) throw Error(ErrorCode::DimensionMismatch, "kappa must have m entries");
  NontradedDrift out;
  out.drift = a - f.dot(rp.lambda_star) - f.dot(kappa);
  const double tol = kKernelTolerance * std::max(1.0, f.norm());
  out.kappa_invariant = true;
  for (Eigen::Index j = 0; j < rp.kernel_basis.cols(); ++j)
    out.kappa_invariant = out.kappa_invariant && std::abs(f.dot(rp.kernel_basis.col(j))) <= tol;
  return out;
}

}  // namespace sdfkit
