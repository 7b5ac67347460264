#pragma once

#include "batchrl/confidence.hpp"

#include <json.hpp>

#include <filesystem>

namespace batchrl {

using json = nlohmann::json;

/**
 * MDP document:
 *   {"S": .., "A": .., "H": .., "s1": ..,
 *    "rewards": [h][s][a], "transitions": [h][s][a][s']}
 * Doubles are written with round-trip precision.
 */
json mdp_to_json(const TabularMDP& mdp);
TabularMDP mdp_from_json(const json& doc);
void save_mdp(const std::filesystem::path& path, const TabularMDP& mdp);
TabularMDP load_mdp(const std::filesystem::path& path);

/// {"S", "A", "H", "counts": [{"h", "s", "a", "s'", "n"}]} listing nonzero tallies.
json counts_to_json(const TransitionCounts& counts);
TransitionCounts counts_from_json(const json& doc);

/// [{"hsa": [h, s, a], "constraints": [{"coeffs": [...], "bound": x}]}].
json region_to_json(const ConfidenceRegion& region);

/// {"V": [h][s], "Q": [h][s][a]}.
json values_to_json(const std::vector<Vector>& V, const std::vector<Matrix>& Q);

json policy_to_json(const MarkovPolicy& policy);

} // namespace batchrl
