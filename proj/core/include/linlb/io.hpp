#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "linlb/experiment.hpp"
#include "linlb/features.hpp"
#include "linlb/tree_mdp.hpp"
#include "linlb/verify.hpp"

namespace linlb {

using nlohmann::json;

/// {variant, H, special_leaf, noise_amplitude, noise_seed,
///  rewards: [[state, "A1"|"A2", value], ...]} with nonzero rewards only.
json to_json(const TreeMDP& mdp);
TreeMDP tree_mdp_from_json(const json& j);

/// {kind, dim, eps, vectors: [[...], ...]}
json to_json(const VectorSet& set);
VectorSet vector_set_from_json(const json& j);

/// {kind, H, dim, padded_dim, backing?}
json to_json(const FeatureMap& fmap);
FeatureMap feature_map_from_json(const json& j);

json to_json(const VerificationReport& report);
json to_json(const ExperimentRecord& record);
ExperimentRecord experiment_record_from_json(const json& j);

json to_json(const Policy& pi);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);

/// Compact dump with a trailing newline; key order is fixed by construction.
std::string dump_line(const json& j);

}  // namespace linlb
