#pragma once

#include <string>

#include <json.hpp>

#include "saaf/activation.hpp"
#include "saaf/net.hpp"

namespace saaf {

// JSON forms round-trip bit-exactly: numbers are written with the shortest
// representation that reparses to the identical double.

/// {"c": ..., "breaks": [...], "w": [...], "v": [...]}
nlohmann::json saaf_to_json(const Saaf& f);
Saaf saaf_from_json(const nlohmann::json& j);

nlohmann::json activation_to_json(const Activation& a);
Activation activation_from_json(const nlohmann::json& j);

/// Versioned network snapshot including batch-normalization running
/// statistics; format tag "saaf-net/1".
nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace saaf
