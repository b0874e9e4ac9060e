#include "sdfkit/market_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "sdfkit/error.hpp"

namespace sdfkit {

using nlohmann::json;

namespace {

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + " must be a JSON object");
  for (const char* key : required)
    if (!j.contains(key)) throw Error(ErrorCode::ParseError, where + " is missing key '" + key + "'");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : required) known = known || item.key() == key;
    for (const char* key : optional) known = known || item.key() == key;
    if (!known) throw Error(ErrorCode::ParseError, where + " has unknown key '" + item.key() + "'");
  }
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, what + " must be a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

json to_array(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

RawMarket market_from_json(const json& j) {
  require_keys(j, {"outcomes", "probabilities", "baseline"}, {"assets"}, "market");
  RawMarket raw;
  if (!j["outcomes"].is_array()) throw Error(ErrorCode::ParseError, "outcomes must be an array of strings");
  for (const auto& o : j["outcomes"]) {
    if (!o.is_string()) throw Error(ErrorCode::ParseError, "outcomes must be an array of strings");
    raw.outcomes.push_back(o.get<std::string>());
  }
  raw.probabilities = numbers(j["probabilities"], "probabilities");

  const json& base = j["baseline"];
  require_keys(base, {"s0", "sT"}, {}, "baseline");
  raw.baseline_s0 = number(base["s0"], "baseline.s0");
  raw.baseline_sT = numbers(base["sT"], "baseline.sT");

  if (j.contains("assets")) {
    if (!j["assets"].is_array()) throw Error(ErrorCode::ParseError, "assets must be an array");
    for (const auto& a : j["assets"]) {
      require_keys(a, {"name", "s0", "sT"}, {}, "asset");
      if (!a["name"].is_string()) throw Error(ErrorCode::ParseError, "asset name must be a string");
      raw.assets.push_back({a["name"].get<std::string>(), number(a["s0"], "asset.s0"), numbers(a["sT"], "asset.sT")});
    }
  }
  return raw;
}

json market_to_json(const DiscreteMarket& market) {
  json j;
  j["outcomes"] = market.outcomes();
  j["probabilities"] = to_array(market.prob());
  j["baseline"] = {{"s0", market.baseline_s0()}, {"sT", to_array(market.baseline_sT())}};
  json assets = json::array();
  for (std::size_t i = 0; i < market.num_assets(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    assets.push_back({{"name", market.asset_names()[i]},
                      {"s0", market.asset_s0()(row)},
                      {"sT", to_array(market.asset_sT().row(row).transpose())}});
  }
  j["assets"] = assets;
  return j;
}

DiscreteMarket load_market(const std::filesystem::path& path) {
  return validate_market(market_from_json(read_json_file(path)));
}

ClaimPayoff claim_from_json(const json& j, const DiscreteMarket& market) {
  require_keys(j, {"name", "payoff"}, {}, "claim");
  if (!j["name"].is_string()) throw Error(ErrorCode::ParseError, "claim name must be a string");
  const auto payoff = numbers(j["payoff"], "claim.payoff");
  return make_claim(market, j["name"].get<std::string>(),
                    Eigen::Map<const Vec>(payoff.data(), static_cast<Eigen::Index>(payoff.size())));
}

json claim_to_json(const ClaimPayoff& claim) {
  return {{"name", claim.name}, {"payoff", to_array(claim.h_T)}};
}

ClaimPayoff load_claim(const std::filesystem::path& path, const DiscreteMarket& market) {
  return claim_from_json(read_json_file(path), market);
}

}  // namespace sdfkit
