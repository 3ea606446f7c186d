#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mdlab/lattice_dist.hpp"

namespace mdlab {

/// {"support": [...], "logp": [...]} with an optional "meta" string.
nlohmann::json to_json(const ExactDistribution& d);
ExactDistribution distribution_from_json(const nlohmann::json& j);

/// A JSON array of distribution objects.
std::vector<ExactDistribution> distributions_from_json(const nlohmann::json& j);

}  // namespace mdlab
