#pragma once

#include "mapfluct/map_spec.hpp"

#include <json.hpp>

namespace mapfluct {

// JSON layout (documented in README):
//   {"phases": [{"drift": a, "gaussian": b, "jumps": {...}}, ...],
//    "Q": [[...], ...],
//    "transitions": [{"from": i, "to": j, "law": {...}}, ...]}
// Ladder specs use the same layout with "killing" per phase and only
// compound Poisson jumps.
MapSpec map_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MapSpec& spec);
LadderSpec ladder_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LadderSpec& spec);

LevyComponent component_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LevyComponent& c);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Eigen::MatrixXd& m);

}  // namespace mapfluct
