#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sdfkit/market.hpp"

namespace sdfkit {

// Market file:
//   {"outcomes": ["u", "d"], "probabilities": [0.5, 0.5],
//    "baseline": {"s0": 1, "sT": [1, 1]},
//    "assets": [{"name": "S1", "s0": 1, "sT": [2, 0.5]}]}
// Claim file:
//   {"name": "arrow_u", "payoff": [1, 0]}
// Unknown keys anywhere are rejected with ParseError.

RawMarket market_from_json(const nlohmann::json& j);
nlohmann::json market_to_json(const DiscreteMarket& market);
DiscreteMarket load_market(const std::filesystem::path& path);

ClaimPayoff claim_from_json(const nlohmann::json& j, const DiscreteMarket& market);
nlohmann::json claim_to_json(const ClaimPayoff& claim);
ClaimPayoff load_claim(const std::filesystem::path& path, const DiscreteMarket& market);

/// Reads and parses a JSON document; IoFailure or ParseError on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace sdfkit
