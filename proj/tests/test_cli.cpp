#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sdfkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = sdfkit::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(SDFKIT_TEST_DATA) + "/" + name; }

// Structural equality with a relative tolerance on floating-point leaves.
bool near(const json& a, const json& b, double tol, std::string path, std::string& where) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) <= tol * std::max(1.0, std::max(std::abs(x), std::abs(y)))) return true;
    where = path;
    return false;
  }
  if (a.type() != b.type() || a.size() != b.size()) {
    where = path;
    return false;
  }
  if (a.is_object()) {
    for (const auto& item : a.items()) {
      if (!b.contains(item.key()) || !near(item.value(), b[item.key()], tol, path + "." + item.key(), where))
        return false;
    }
    return true;
  }
  if (a.is_array()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!near(a[i], b[i], tol, path + "[" + std::to_string(i) + "]", where)) return false;
    return true;
  }
  if (a != b) where = path;
  return a == b;
}

void check_golden(const std::string& name, const std::vector<std::string>& args) {
  const Result r = invoke(args);
  REQUIRE_MESSAGE(r.status == 0, r.err);
  json got = json::parse(r.out);
  got.erase("wall_clock_seconds");
  const fs::path golden = fs::path(SDFKIT_TEST_GOLDEN) / (name + ".json");
  if (std::getenv("SDFKIT_UPDATE_GOLDEN")) {
    // the command echo holds absolute paths, so it is not stored
    const json stored = {{"input_digest", got["input_digest"]}, {"results", got["results"]}};
    std::ofstream(golden) << stored.dump(2) << "\n";
    return;
  }
  std::ifstream in(golden);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << golden);
  const json expected = json::parse(in);
  std::string where;
  CHECK(got["input_digest"] == expected["input_digest"]);
  CHECK_MESSAGE(near(got["results"], expected["results"], 1e-9, "results", where), name << " differs at " << where);
}

}  // namespace

TEST_CASE("analyze worked examples") {
  Result r = invoke({"analyze", data("binary.json")});
  REQUIRE(r.status == 0);
  json j = json::parse(r.out);
  CHECK(j["tool"] == "sdfkit");
  CHECK(j["results"]["no_arbitrage"] == true);
  CHECK(j["results"]["sdf_exists"] == true);
  CHECK(j["results"]["rn_exists"] == true);
  CHECK(j["input_digest"].get<std::string>().size() == 64);

  r = invoke({"analyze", data("dominated.json")});
  REQUIRE(r.status == 0);
  j = json::parse(r.out);
  CHECK(j["results"]["no_arbitrage"] == false);
  CHECK(j["results"]["certificate"]["theta"][0].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("price, optimize and bounds") {
  Result r = invoke({"price", data("binary.json"), data("arrow_u.json"), "--utility", "log", "--x", "1"});
  REQUIRE_MESSAGE(r.status == 0, r.err);
  json j = json::parse(r.out);
  CHECK(j["results"]["price"].get<double>() == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(j["results"]["covariance"]["cov_term"].get<double>() == doctest::Approx(-1.0 / 6));

  r = invoke({"optimize", data("binary.json"), "--utility", "exp:alpha=1", "--x", "1"});
  REQUIRE(r.status == 0);
  j = json::parse(r.out);
  CHECK(j["results"]["solution"]["theta_star"][0].get<double>() == doctest::Approx(2.0 / 3 * std::log(2.0)));

  r = invoke({"bounds", data("trinomial.json"), data("arrow_a.json")});
  REQUIRE(r.status == 0);
  j = json::parse(r.out);
  CHECK(std::abs(j["results"]["bounds"]["lower"].get<double>()) <= 1e-8);
  CHECK(j["results"]["bounds"]["upper"].get<double>() == doctest::Approx(1.0 / 3));
  CHECK(j["results"]["replication"]["replicable"] == false);
}

TEST_CASE("golden reports") {
  check_golden("analyze_binary", {"analyze", data("binary.json")});
  check_golden("analyze_dominated", {"analyze", data("dominated.json")});
  check_golden("analyze_trinomial", {"analyze", data("trinomial.json")});
  check_golden("optimize_binary_log", {"optimize", data("binary.json"), "--utility", "log", "--x", "1"});
  check_golden("optimize_trinomial_power", {"optimize", data("trinomial.json"), "--utility", "power:gamma=2"});
  check_golden("price_binary_arrow", {"price", data("binary.json"), data("arrow_u.json"), "--utility", "log"});
  check_golden("price_trinomial_arrow", {"price", data("trinomial.json"), data("arrow_a.json"), "--utility", "log"});
  check_golden("bounds_trinomial_arrow", {"bounds", data("trinomial.json"), data("arrow_a.json")});
  check_golden("simulate_bs", {"simulate", data("bs.json"), "--paths", "2000", "--steps", "8", "--seed", "42",
                               "--portfolio", "1"});
  check_golden("simulate_bessel", {"simulate", data("bessel3.json"), "--paths", "2000", "--steps", "4", "--seed", "3"});
  check_golden("decompose_bs2", {"decompose", data("bs2.json"), "--kappa", "0,0.3", "--paths", "2000", "--seed", "5"});
  check_golden("bessel_kind1", {"bessel", "--kind", "1", "--T", "1", "--paths", "2000", "--seed", "7"});
  check_golden("bessel_kind2", {"bessel", "--kind", "2", "--T", "1", "--paths", "2000", "--seed", "7"});
}

TEST_CASE("error exit codes") {
  Result r = invoke({"optimize", data("dominated.json")});
  CHECK(r.status == 1);
  json e = json::parse(r.err);
  CHECK(e["error"] == "ArbitrageDetected");
  CHECK(e["code"] == 100);

  r = invoke({"analyze", "/nonexistent.json"});
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["code"] == 12);

  r = invoke({"simulate", data("bs.json"), "--paths", "10"});
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["error"] == "InvalidArgument");

  r = invoke({"optimize", data("binary.json"), "--utility", "cubic"});
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["error"] == "InvalidUtility");

  r = invoke({"decompose", data("bs2.json"), "--kappa", "0.3,0", "--paths", "1000", "--seed", "1"});
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["error"] == "KappaNotInKernel");

  r = invoke({"analyze", data("binary.json"), "--format", "csv"});
  CHECK(r.status == 2);

  r = invoke({"frobnicate"});
  CHECK(r.status == 2);
}

TEST_CASE("formats: csv header, json round trip, table numbers") {
  const std::vector<std::string> base{"simulate", data("bs.json"), "--paths", "1000", "--steps", "4", "--seed", "1"};
  auto args = base;
  args.insert(args.end(), {"--format", "csv"});
  Result r = invoke(args);
  REQUIRE(r.status == 0);
  CHECK(r.out.rfind("time,statistic,mean,std_error,n_paths\n", 0) == 0);

  r = invoke(base);
  REQUIRE(r.status == 0);
  const json j = json::parse(r.out);
  CHECK(json::parse(j.dump()) == j);

  args = base;
  args.insert(args.end(), {"--format", "table"});
  const Result t = invoke(args);
  REQUIRE(t.status == 0);
  for (const auto& stat : j["results"]["statistics"])
    for (const auto& m : stat["means"]) CHECK(t.out.find(sdfkit::cli::format_number(m.get<double>())) != std::string::npos);

  // the csv rows carry the same numbers as the json statistics
  std::istringstream csv(invoke([&] {
                           auto a = base;
                           a.insert(a.end(), {"--format", "csv"});
                           return a;
                         }())
                             .out);
  std::string line;
  std::getline(csv, line);
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  std::size_t expected = 0;
  for (const auto& stat : j["results"]["statistics"]) expected += stat["means"].size();
  CHECK(rows == expected);
}

TEST_CASE("report files") {
  const fs::path dir = fs::temp_directory_path() / "sdfkit_cli_test_out";
  fs::remove_all(dir);
  Result r = invoke({"bessel", "--kind", "2", "--paths", "1000", "--seed", "9", "--out", dir.string()});
  REQUIRE(r.status == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(fs::exists(dir / "stats.csv"));
  std::ifstream in(dir / "report.json");
  const json j = json::parse(in);
  CHECK(j["command"] == json::parse(r.out)["command"]);
  for (const auto& a : j["command"]) CHECK(a != "--out");
  fs::remove_all(dir);
}
