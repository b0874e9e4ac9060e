#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "sdfkit/error.hpp"
#include "sdfkit/ftap.hpp"
#include "sdfkit/ito.hpp"
#include "sdfkit/ito_io.hpp"
#include "sdfkit/market_io.hpp"
#include "sdfkit/pricing.hpp"
#include "sdfkit/utility.hpp"

namespace sdfkit::cli {

using nlohmann::json;

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::InternalInconsistency, "SHA-256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

void require_inputs(const RunConfig& c, std::size_t n) {
  if (c.inputs.size() != n)
    throw Error(ErrorCode::InvalidArgument,
                c.command + " expects " + std::to_string(n) + " input file(s), got " + std::to_string(c.inputs.size()));
}

// ---- one-period commands -------------------------------------------------

json market_summary(const DiscreteMarket& m) {
  json j;
  j["outcomes"] = m.outcomes();
  j["assets"] = m.asset_names();
  return j;
}

json analyze(const RunConfig& c) {
  require_inputs(c, 1);
  const DiscreteMarket m = load_market(c.inputs[0]);
  const FtapReport r = ftap_verdict(m);
  json j;
  j["market"] = market_summary(m);
  j["no_arbitrage"] = r.no_arbitrage;
  j["sdf_exists"] = r.sdf_exists;
  j["rn_exists"] = r.rn_exists;
  j["sdf"] = r.sdf ? vec_json(r.sdf->y_T) : json(nullptr);
  j["risk_neutral"] = r.risk_neutral ? vec_json(r.risk_neutral->q) : json(nullptr);
  if (r.certificate) {
    j["certificate"] = {{"theta", vec_json(r.certificate->theta)}, {"payoff", vec_json(r.certificate->payoff)}};
  } else {
    j["certificate"] = nullptr;
  }
  if (r.no_arbitrage) {
    const SdfSolutionSpace space = sdf_solution_space(m);
    j["sdf_space"] = {{"dimension", space.dimension}, {"rank", space.rank}, {"complete", space.dimension == 0}};
  } else {
    j["sdf_space"] = nullptr;
  }
  return j;
}

json solution_json(const DiscreteMarket& m, const OptimalSolution& sol) {
  json j;
  j["theta_star"] = vec_json(sol.theta_star);
  j["x"] = sol.x;
  j["wealth_star"] = vec_json(sol.wealth_star);
  j["objective"] = sol.objective;
  j["sdf"] = vec_json(sol.sdf.y_T);
  j["iterations"] = sol.diagnostics.iterations;
  j["gradient_norm"] = sol.diagnostics.gradient_norm;
  j["gradient_steps"] = sol.diagnostics.gradient_steps;
  const SdfMartingaleReport mart = verify_sdf_martingale(m, sol.sdf, 100);
  j["sdf_martingale"] = {{"trials", mart.trials}, {"failures", mart.failures}, {"max_deviation", mart.max_deviation}};
  return j;
}

json optimize_cmd(const RunConfig& c) {
  require_inputs(c, 1);
  const DiscreteMarket m = load_market(c.inputs[0]);
  const UtilitySpec u = UtilitySpec::parse(c.utility);
  json j;
  j["utility"] = u.to_string();
  j["solution"] = solution_json(m, optimize(m, u, c.x));
  return j;
}

json interval_json(const PriceInterval& iv) {
  return {{"lower", iv.lower},
          {"upper", iv.upper},
          {"lower_attained", iv.lower_attained},
          {"upper_attained", iv.upper_attained},
          {"replicable", iv.replicable}};
}

json replication_json(const ReplicationResult& r) {
  json j{{"replicable", r.replicable}, {"residual", r.residual}};
  if (r.replicable) {
    j["x"] = r.x;
    j["theta"] = vec_json(r.theta);
  }
  return j;
}

json price_cmd(const RunConfig& c) {
  require_inputs(c, 2);
  const DiscreteMarket m = load_market(c.inputs[0]);
  const ClaimPayoff h = load_claim(c.inputs[1], m);
  const UtilitySpec u = UtilitySpec::parse(c.utility);
  const IndifferencePrice ip = indifference_price(m, u, c.x, h);
  json j;
  j["utility"] = u.to_string();
  j["x"] = c.x;
  j["claim"] = h.name;
  j["price"] = ip.price;
  j["sdf"] = vec_json(ip.sdf.y_T);
  j["state_prices"] = vec_json(state_prices(m, ip.sdf).p);
  j["verification"] = {{"eps_star", ip.eps_star},
                       {"eps_unique", ip.eps_unique},
                       {"wealth_gap", ip.wealth_gap},
                       {"verified", ip.verified}};
  j["bounds"] = interval_json(price_bounds(m, h));
  j["replication"] = replication_json(replication_check(m, h));
  // covariance split only when the baseline is a constant-rate bond
  const double gross = m.baseline_sT()(0) / m.baseline_s0();
  const double r = (gross - 1.0) / c.horizon;
  try {
    const CovarianceDecomposition cd = covariance_decomposition(m, ip.sdf, h, r, c.horizon);
    j["covariance"] = {{"r", r}, {"T", c.horizon}, {"rn_term", cd.rn_term}, {"cov_term", cd.cov_term}, {"total", cd.total}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BaselineNotConstantRate) throw;
    j["covariance"] = nullptr;
  }
  return j;
}

json bounds_cmd(const RunConfig& c) {
  require_inputs(c, 2);
  const DiscreteMarket m = load_market(c.inputs[0]);
  const ClaimPayoff h = load_claim(c.inputs[1], m);
  json j;
  j["claim"] = h.name;
  j["bounds"] = interval_json(price_bounds(m, h));
  j["replication"] = replication_json(replication_check(m, h));
  return j;
}

// ---- path commands -------------------------------------------------------

struct Series {
  std::string name;
  PathValues values;
  std::optional<double> initial;  // martingale test target
};

json series_json(const Series& s, std::vector<CsvRow>& csv) {
  json j;
  j["statistic"] = s.name;
  j["times"] = s.values.times;
  std::vector<double> means, ses;
  const auto n = static_cast<std::size_t>(s.values.values.rows());
  std::vector<double> column(n);
  for (std::size_t k = 0; k < s.values.times.size(); ++k) {
    for (std::size_t p = 0; p < n; ++p)
      column[p] = s.values.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
    const SampleStats st = sample_stats(column);
    means.push_back(st.mean);
    ses.push_back(st.std_error);
    csv.push_back({s.values.times[k], s.name, st.mean, st.std_error, n});
  }
  j["means"] = means;
  j["std_errors"] = ses;
  if (s.initial && n >= kMinMartingalePaths) {
    const MartingaleTestReport t = martingale_test(s.values, *s.initial);
    j["martingale_test"] = {{"initial", t.initial},
                            {"z_crit", t.z_crit},
                            {"times", t.times},
                            {"z_scores", t.z_scores},
                            {"verdict", verdict_name(t.verdict)}};
  } else {
    j["martingale_test"] = nullptr;
  }
  return j;
}

json statistics_json(const std::vector<Series>& all, std::vector<CsvRow>& csv) {
  json arr = json::array();
  for (const Series& s : all) arr.push_back(series_json(s, csv));
  return arr;
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw Error(ErrorCode::InvalidArgument, c.command + " requires --seed");
  return *c.seed;
}

std::string asset_label(Eigen::Index i) { return "S" + std::to_string(i + 1); }

json simulate_cmd(const RunConfig& c, std::vector<CsvRow>& csv) {
  require_inputs(c, 1);
  const std::uint64_t seed = require_seed(c);
  const ItoModelSpec model = load_model(c.inputs[0]);
  const std::size_t steps = c.steps ? c.steps : 252;
  const PathEnsemble e = simulate(model, steps, c.paths, seed, {RecordMode::Checkpoints, c.threads});

  json j;
  j["model"] = model_to_json(model);
  j["n_steps"] = steps;
  j["n_paths"] = c.paths;
  j["seed"] = seed;
  std::vector<Series> series;
  const Eigen::Index d = model.num_assets();
  if (model.kind == ModelKind::ConstantCoefficients) {
    RiskPremium rp = risk_premium_star(model);
    if (!c.kappa.empty()) rp = with_kappa(model, rp, to_vec(c.kappa));
    j["lambda_star"] = vec_json(rp.lambda_star);
    j["kernel_basis"] = mat_json(rp.kernel_basis);
    const PathValues y_star = sdf_star_paths(e, rp);
    series.push_back({"Ystar*S0", multiply(y_star, baseline_paths(e)), model.baseline_s0});
    for (Eigen::Index i = 0; i < d; ++i) {
      const PathValues s = asset_paths(e, i);
      series.push_back({asset_label(i), s, std::nullopt});
      series.push_back({"Ystar*" + asset_label(i), multiply(y_star, s), model.s0(i)});
    }
    if (!c.portfolio.empty()) {
      const Vec pi = to_vec(c.portfolio);
      const PathValues x = wealth_paths(e, pi);
      j["portfolio"] = vec_json(pi);
      j["log_wealth_drift"] = log_wealth_drift(model, pi);
      series.push_back({"X_pi", x, std::nullopt});
      series.push_back({"Ystar*X_pi", multiply(y_star, x), 1.0});
    }
    if (!c.kappa.empty()) {
      const ComposedSdf y = sdf_compose(e, rp);
      j["kappa"] = vec_json(rp.kappa);
      series.push_back({"N_kappa", y.n_kappa, 1.0});
      for (Eigen::Index i = 0; i < d; ++i)
        series.push_back({"Y*" + asset_label(i), multiply(y.y, asset_paths(e, i)), model.s0(i)});
    }
  } else {
    if (!c.portfolio.empty() || !c.kappa.empty())
      throw Error(ErrorCode::InvalidArgument, "--portfolio and --kappa need a constant-coefficient model");
    const PathValues s = asset_paths(e, 0);
    if (model.kind == ModelKind::Bessel3) {
      const PathValues y = reciprocal(s);
      series.push_back({"S1", s, std::nullopt});
      series.push_back({"Y*S0", y, 1.0 / model.bessel_s0});
      series.push_back({"Y*S1", multiply(y, s), 1.0});
    } else {
      series.push_back({"S1", s, model.bessel_s0});
    }
  }
  j["statistics"] = statistics_json(series, csv);
  return j;
}

json decompose_cmd(const RunConfig& c, std::vector<CsvRow>& csv) {
  require_inputs(c, 1);
  const std::uint64_t seed = require_seed(c);
  const ItoModelSpec model = load_model(c.inputs[0]);
  if (model.kind != ModelKind::ConstantCoefficients)
    throw Error(ErrorCode::InvalidModel, "decompose needs a constant-coefficient model");
  if (c.kappa.empty()) throw Error(ErrorCode::InvalidArgument, "decompose requires --kappa");
  const RiskPremium rp = with_kappa(model, risk_premium_star(model), to_vec(c.kappa));
  const std::size_t steps = c.steps ? c.steps : 4;
  const PathEnsemble e = simulate(model, steps, c.paths, seed, {RecordMode::Checkpoints, c.threads});
  const ComposedSdf y = sdf_compose(e, rp);

  json j;
  j["model"] = model_to_json(model);
  j["n_steps"] = steps;
  j["n_paths"] = c.paths;
  j["seed"] = seed;
  j["lambda_star"] = vec_json(rp.lambda_star);
  j["kappa"] = vec_json(rp.kappa);
  j["kernel_basis"] = mat_json(rp.kernel_basis);
  const double lhs = (rp.lambda_star + rp.kappa).squaredNorm();
  const double rhs = rp.lambda_star.squaredNorm() + rp.kappa.squaredNorm();
  j["pythagoras"] = {{"norm2_lambda_plus_kappa", lhs}, {"norm2_sum", rhs}, {"deviation", lhs - rhs}};
  j["inner_product_lambda_kappa"] = rp.lambda_star.dot(rp.kappa);

  std::vector<Series> series;
  series.push_back({"N_kappa", y.n_kappa, 1.0});
  series.push_back({"Y*S0", multiply(y.y, baseline_paths(e)), model.baseline_s0});
  for (Eigen::Index i = 0; i < model.num_assets(); ++i)
    series.push_back({"Y*" + asset_label(i), multiply(y.y, asset_paths(e, i)), model.s0(i)});
  j["statistics"] = statistics_json(series, csv);
  return j;
}

json test_json(const MartingaleTestReport& t) {
  return {{"initial", t.initial},
          {"z_crit", t.z_crit},
          {"times", t.times},
          {"means", t.means},
          {"std_errors", t.std_errors},
          {"z_scores", t.z_scores},
          {"verdict", verdict_name(t.verdict)}};
}

void test_rows(const std::string& name, const MartingaleTestReport& t, std::vector<CsvRow>& csv) {
  for (std::size_t k = 0; k < t.times.size(); ++k) csv.push_back({t.times[k], name, t.means[k], t.std_errors[k], t.n_paths});
}

json bessel_cmd(const RunConfig& c, std::vector<CsvRow>& csv) {
  require_inputs(c, 0);
  const std::uint64_t seed = require_seed(c);
  const std::size_t steps = c.steps ? c.steps : 4;
  json j;
  j["kind"] = c.kind;
  j["T"] = c.horizon;
  j["n_paths"] = c.paths;
  j["n_steps"] = steps;
  j["seed"] = seed;
  if (c.kind == 1) {
    const BesselExample1 ex = bessel_example1(c.horizon, c.paths, seed, steps, c.threads);
    j["inverse_terminal_mean"] = ex.inverse_terminal.mean;
    j["inverse_terminal_std_error"] = ex.inverse_terminal.std_error;
    j["closed_form"] = ex.closed_form;
    j["pathwise_product_max_dev"] = ex.pathwise_product_max_dev;
    j["baseline_test"] = test_json(ex.baseline_test);
    j["asset_test"] = test_json(ex.asset_test);
    test_rows("Y*S0", ex.baseline_test, csv);
    test_rows("Y*S1", ex.asset_test, csv);
  } else if (c.kind == 2) {
    const BesselExample2 ex = bessel_example2(c.horizon, c.paths, seed, steps, c.threads);
    j["terminal_mean"] = ex.terminal.mean;
    j["terminal_std_error"] = ex.terminal.std_error;
    j["gap"] = ex.gap;
    j["gap_std_error"] = ex.gap_std_error;
    j["gap_ci"] = {ex.ci_low, ex.ci_high};
    j["closed_form_gap"] = ex.closed_form_gap;
    j["asset_test"] = test_json(ex.asset_test);
    test_rows("S1", ex.asset_test, csv);
  } else {
    throw Error(ErrorCode::InvalidArgument, "--kind must be 1 or 2");
  }
  return j;
}

int exit_code_for(ErrorCode code) { return is_input_error(code) ? 2 : 1; }

void print_error(std::ostream& err, ErrorCode code, const std::string& message) {
  json e{{"error", std::string(error_name(code))}, {"code", static_cast<int>(code)}, {"message", message}};
  err << e.dump() << '\n';
}

}  // namespace

Report execute(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.threads == 0) throw Error(ErrorCode::InvalidArgument, "--threads must be >= 1");
  Report report;
  report.command = config.echo;
  std::string bytes;
  for (const std::string& in : config.inputs) bytes += read_bytes(in);
  report.input_digest = sha256_hex(bytes);

  const std::string& cmd = config.command;
  if (cmd == "analyze") {
    report.results = analyze(config);
  } else if (cmd == "optimize") {
    report.results = optimize_cmd(config);
  } else if (cmd == "price") {
    report.results = price_cmd(config);
  } else if (cmd == "bounds") {
    report.results = bounds_cmd(config);
  } else if (cmd == "simulate") {
    report.results = simulate_cmd(config, report.csv);
  } else if (cmd == "decompose") {
    report.results = decompose_cmd(config, report.csv);
  } else if (cmd == "bessel") {
    report.results = bessel_cmd(config, report.csv);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown command '" + cmd + "'");
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic discount factors, arbitrage checks and pricing"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out_dir, "directory for report.json, report.txt and stats.csv");
    sub->add_option("--format", cfg.format, "stdout format")->check(CLI::IsMember({"json", "csv", "table"}));
  };
  auto paths = [&](CLI::App* sub) {
    sub->add_option("--paths", cfg.paths, "number of simulated paths")->check(CLI::PositiveNumber);
    sub->add_option("--steps", cfg.steps, "time steps")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "RNG seed (required)");
    sub->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* analyze = app.add_subcommand("analyze", "arbitrage, SDF and risk-neutral verdicts");
  analyze->add_option("market", cfg.inputs, "market file")->required()->expected(1);
  common(analyze);

  auto* optimize = app.add_subcommand("optimize", "expected-utility optimum and induced SDF");
  optimize->add_option("market", cfg.inputs, "market file")->required()->expected(1);
  optimize->add_option("--utility", cfg.utility, "log | power:gamma=G | exp:alpha=A");
  optimize->add_option("--x", cfg.x, "initial capital");
  common(optimize);

  auto* price = app.add_subcommand("price", "indifference price of a claim");
  price->add_option("files", cfg.inputs, "market file and claim file")->required()->expected(2);
  price->add_option("--utility", cfg.utility, "log | power:gamma=G | exp:alpha=A");
  price->add_option("--x", cfg.x, "initial capital");
  price->add_option("--T", cfg.horizon, "horizon for the covariance split")->check(CLI::PositiveNumber);
  common(price);

  auto* bounds = app.add_subcommand("bounds", "arbitrage-free price interval of a claim");
  bounds->add_option("files", cfg.inputs, "market file and claim file")->required()->expected(2);
  common(bounds);

  auto* simulate = app.add_subcommand("simulate", "simulate a continuous-time model");
  simulate->add_option("model", cfg.inputs, "model file")->required()->expected(1);
  paths(simulate);
  simulate->add_option("--portfolio", cfg.portfolio, "constant proportions pi")->delimiter(',');
  simulate->add_option("--kappa", cfg.kappa, "kernel element kappa")->delimiter(',');
  common(simulate);

  auto* decompose = app.add_subcommand("decompose", "SDF composition Y = Y* N^kappa");
  decompose->add_option("model", cfg.inputs, "model file")->required()->expected(1);
  paths(decompose);
  decompose->add_option("--kappa", cfg.kappa, "kernel element kappa")->delimiter(',')->required();
  common(decompose);

  auto* bessel = app.add_subcommand("bessel", "Bessel strict-local-martingale examples");
  bessel->add_option("--kind", cfg.kind, "1 or 2")->check(CLI::IsMember({1, 2}));
  bessel->add_option("--T", cfg.horizon, "horizon")->check(CLI::PositiveNumber);
  paths(bessel);
  common(bessel);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, ErrorCode::InvalidArgument, e.what());
    return 2;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  json echo = json::array();
  echo.push_back(cfg.command);
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0) continue;
    echo.push_back(a);
  }
  cfg.echo = echo;

  try {
    const Report report = execute(cfg);
    const std::string text = render(report, cfg.format);
    if (!cfg.out_dir.empty()) write_report_files(report, cfg.out_dir);
    out << text;
    out.flush();
    return 0;
  } catch (const Error& e) {
    print_error(err, e.code(), e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    print_error(err, ErrorCode::ParseError, e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error(err, ErrorCode::InternalInconsistency, e.what());
    return 1;
  }
}

}  // namespace sdfkit::cli
