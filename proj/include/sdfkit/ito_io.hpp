#pragma once

#include <filesystem>

#include <json.hpp>

#include "sdfkit/ito.hpp"

namespace sdfkit {

// Model file:
//   {"kind": "constant_coefficients", "d": 1, "m": 1, "r": 0.02, "b": [0.06],
//    "sigma": [0.2], "s0": [1], "T": 1, "baseline_s0": 1}
// sigma is m x d, either row-major flat or as a list of m rows.
//   {"kind": "bessel3", "T": 1, "s0": 1}
// Unknown keys are rejected with ParseError.

ItoModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ItoModelSpec& model);
ItoModelSpec load_model(const std::filesystem::path& path);

}  // namespace sdfkit
