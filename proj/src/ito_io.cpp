#include "sdfkit/ito_io.hpp"

#include <initializer_list>
#include <string>

#include "sdfkit/error.hpp"
#include "sdfkit/market_io.hpp"

namespace sdfkit {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
  for (const char* key : required)
    if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("model is missing key '") + key + "'");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : required) known = known || item.key() == key;
    for (const char* key : optional) known = known || item.key() == key;
    if (!known) throw Error(ErrorCode::ParseError, "model has unknown key '" + item.key() + "'");
  }
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must be a number");
  return j.get<double>();
}

long count(const json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw Error(ErrorCode::ParseError, std::string(what) + " must be an integer");
  return j.get<long>();
}

Vec vector(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

json to_array(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

ItoModelSpec model_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "model must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw Error(ErrorCode::ParseError, "model.kind must be a string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "bessel3" || kind == "inverse_bessel3") {
    check_keys(j, {"kind", "T"}, {"s0"});
    const double s0 = j.contains("s0") ? number(j["s0"], "s0") : 1.0;
    const double T = number(j["T"], "T");
    return kind == "bessel3" ? ItoModelSpec::bessel3(T, s0) : ItoModelSpec::inverse_bessel3(T, s0);
  }
  if (kind != "constant_coefficients") throw Error(ErrorCode::ParseError, "unknown model kind '" + kind + "'");
  check_keys(j, {"kind", "d", "m", "r", "b", "sigma", "s0", "T"}, {"baseline_s0"});
  const long d = count(j["d"], "d");
  const long m = count(j["m"], "m");
  if (d < 1 || m < 1) throw Error(ErrorCode::InvalidModel, "d and m must be positive");
  const Vec b = vector(j["b"], "b");
  const Vec s0 = vector(j["s0"], "s0");
  if (b.size() != d || s0.size() != d) throw Error(ErrorCode::DimensionMismatch, "b and s0 must have d entries");

  Mat sigma(m, d);
  const json& sj = j["sigma"];
  if (!sj.is_array()) throw Error(ErrorCode::ParseError, "sigma must be an array");
  if (!sj.empty() && sj[0].is_array()) {
    if (static_cast<long>(sj.size()) != m) throw Error(ErrorCode::DimensionMismatch, "sigma must have m rows");
    for (long row = 0; row < m; ++row) {
      const Vec r = vector(sj[static_cast<std::size_t>(row)], "sigma row");
      if (r.size() != d) throw Error(ErrorCode::DimensionMismatch, "sigma rows must have d entries");
      sigma.row(row) = r.transpose();
    }
  } else {
    const Vec flat = vector(sj, "sigma");
    if (flat.size() != m * d) throw Error(ErrorCode::DimensionMismatch, "sigma must have m*d entries");
    for (long row = 0; row < m; ++row)
      for (long col = 0; col < d; ++col) sigma(row, col) = flat(row * d + col);
  }
  const double baseline_s0 = j.contains("baseline_s0") ? number(j["baseline_s0"], "baseline_s0") : 1.0;
  return ItoModelSpec::constant_coefficients(number(j["r"], "r"), b, sigma, s0, number(j["T"], "T"), baseline_s0);
}

json model_to_json(const ItoModelSpec& model) {
  json j;
  j["kind"] = model_kind_name(model.kind);
  j["T"] = model.horizon;
  if (model.kind != ModelKind::ConstantCoefficients) {
    j["s0"] = model.bessel_s0;
    return j;
  }
  j["d"] = model.num_assets();
  j["m"] = model.num_brownians();
  j["r"] = model.r;
  j["b"] = to_array(model.b);
  json sigma = json::array();
  for (Eigen::Index row = 0; row < model.sigma.rows(); ++row) sigma.push_back(to_array(model.sigma.row(row).transpose()));
  j["sigma"] = sigma;
  j["s0"] = to_array(model.s0);
  j["baseline_s0"] = model.baseline_s0;
  return j;
}

ItoModelSpec load_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

}  // namespace sdfkit
