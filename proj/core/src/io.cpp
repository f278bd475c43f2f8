#include "linlb/io.hpp"

#include <fstream>
#include <sstream>

#include "linlb/errors.hpp"

namespace linlb {
namespace {

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const TreeMDP& mdp) {
  json rewards = json::array();
  for (const RewardEntry& e : mdp.nonzero_rewards()) {
    rewards.push_back(json::array({e.state, std::string(to_string(e.action)), e.value}));
  }
  json j = json::object();
  j["variant"] = std::string(to_string(mdp.variant()));
  j["H"] = mdp.horizon();
  j["special_leaf"] = mdp.special_leaf() ? json(*mdp.special_leaf()) : json(nullptr);
  j["noise_amplitude"] = mdp.noise_amplitude();
  j["noise_seed"] = mdp.noise_seed();
  j["rewards"] = std::move(rewards);
  return j;
}

TreeMDP tree_mdp_from_json(const json& j) {
  const int H = get_field<int>(j, "H");
  const Variant variant = parse_variant(get_field<std::string>(j, "variant"));
  std::optional<StateId> special;
  if (j.contains("special_leaf") && !j.at("special_leaf").is_null()) {
    special = get_field<StateId>(j, "special_leaf");
  }
  std::vector<RewardEntry> entries;
  for (const json& e : get_field<json>(j, "rewards")) {
    if (!e.is_array() || e.size() != 3) throw ConfigError("reward entries are [state, action, value]");
    try {
      entries.push_back({e[0].get<StateId>(), parse_action(e[1].get<std::string>()),
                         e[2].get<double>()});
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("bad reward entry: ") + ex.what());
    }
  }
  TreeMDP mdp = TreeMDP::from_entries(H, entries, variant, special);
  const double amp = j.contains("noise_amplitude") ? get_field<double>(j, "noise_amplitude") : 0.0;
  if (amp != 0.0) {
    const auto seed = j.contains("noise_seed") ? get_field<std::uint64_t>(j, "noise_seed") : 0;
    mdp = mdp.with_noise(amp, seed);
  }
  return mdp;
}

json to_json(const VectorSet& set) {
  json rows = json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    json row = json::array();
    for (int k = 0; k < set.dim(); ++k) row.push_back(set.vectors(static_cast<Eigen::Index>(i), k));
    rows.push_back(std::move(row));
  }
  json j = json::object();
  j["kind"] = std::string(to_string(set.kind));
  j["dim"] = set.dim();
  j["eps"] = set.eps;
  j["vectors"] = std::move(rows);
  return j;
}

VectorSet vector_set_from_json(const json& j) {
  VectorSet set;
  set.kind = parse_vector_kind(get_field<std::string>(j, "kind"));
  set.eps = get_field<double>(j, "eps");
  const int dim = get_field<int>(j, "dim");
  const json rows = get_field<json>(j, "vectors");
  if (dim < 0 || !rows.is_array()) throw ConfigError("bad vector set");
  set.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(dim)) {
      throw DimensionError("vector " + std::to_string(i) + " has the wrong dimension");
    }
    for (int k = 0; k < dim; ++k) {
      set.vectors(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)].get<double>();
    }
  }
  return set;
}

json to_json(const FeatureMap& fmap) {
  json j = json::object();
  j["kind"] = std::string(to_string(fmap.kind()));
  j["H"] = fmap.horizon();
  j["dim"] = fmap.dim();
  if (fmap.padded_dim() > 0) j["padded_dim"] = fmap.padded_dim();
  if (fmap.backing()) j["backing"] = to_json(*fmap.backing());
  return j;
}

FeatureMap feature_map_from_json(const json& j) {
  const std::string kind = get_field<std::string>(j, "kind");
  const int H = get_field<int>(j, "H");
  if (kind == "sign") return FeatureMap::sign(H);
  if (kind == "onehot") return FeatureMap::onehot(H);
  const VectorSet backing = vector_set_from_json(get_field<json>(j, "backing"));
  if (kind == "block") {
    const int padded = j.contains("padded_dim") ? get_field<int>(j, "padded_dim") : 0;
    return FeatureMap::block(backing, H, padded);
  }
  if (kind == "policy-lb") return FeatureMap::policy_lb(backing, H);
  throw ConfigError("unknown feature kind '" + kind + "'");
}

json to_json(const VerificationReport& r) {
  json j = json::object();
  j["assumption"] = r.assumption;
  j["pass"] = r.pass;
  j["worst_violation"] = r.worst_violation;
  j["threshold"] = r.threshold;
  j["tolerance"] = r.tolerance;
  if (r.witness) {
    json w = json::object();
    w["state"] = r.witness->state;
    w["level"] = r.witness->level;
    w["action"] = r.witness->action ? json(std::string(to_string(*r.witness->action))) : json(nullptr);
    w["next_state"] = r.witness->next_state ? json(*r.witness->next_state) : json(nullptr);
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  if (r.cases) {
    json c = json::object();
    c["off_action"] = r.cases->off_action;
    c["on_action_other"] = r.cases->on_action_other;
    c["on_path"] = r.cases->on_path;
    c["levels_without_path"] = r.cases->levels_without_path;
    j["cases"] = std::move(c);
  }
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

json to_json(const ExperimentRecord& r) {
  json j = json::object();
  j["experiment"] = r.experiment;
  j["H"] = r.H;
  j["d"] = r.d;
  j["delta"] = r.delta;
  j["margin"] = r.margin;
  j["gamma"] = r.gamma;
  j["noise"] = r.noise;
  j["seed"] = r.seed;
  j["learner"] = r.learner;
  j["budget"] = r.budget;
  j["trajectories_used"] = r.trajectories_used;
  j["success"] = r.success;
  j["value_found"] = r.value_found;
  j["opt_value"] = r.opt_value;
  return j;
}

ExperimentRecord experiment_record_from_json(const json& j) {
  ExperimentRecord r;
  r.experiment = get_field<std::string>(j, "experiment");
  r.H = get_field<int>(j, "H");
  r.d = get_field<int>(j, "d");
  r.delta = get_field<double>(j, "delta");
  r.margin = get_field<double>(j, "margin");
  r.gamma = get_field<double>(j, "gamma");
  r.noise = get_field<double>(j, "noise");
  r.seed = get_field<std::uint64_t>(j, "seed");
  r.learner = get_field<std::string>(j, "learner");
  r.budget = get_field<std::uint64_t>(j, "budget");
  r.trajectories_used = get_field<std::uint64_t>(j, "trajectories_used");
  r.success = get_field<bool>(j, "success");
  r.value_found = get_field<double>(j, "value_found");
  r.opt_value = get_field<double>(j, "opt_value");
  return r;
}

json to_json(const Policy& pi) {
  std::string acts;
  acts.reserve(pi.actions().size());
  for (Action a : pi.actions()) acts.push_back(a == Action::A1 ? '1' : '2');
  json j = json::object();
  j["H"] = pi.horizon();
  j["actions"] = std::move(acts);
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string dump_line(const json& j) { return j.dump() + "\n"; }

}  // namespace linlb
