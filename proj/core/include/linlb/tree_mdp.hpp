#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace linlb {

enum class Action : std::uint8_t { A1 = 0, A2 = 1 };

inline constexpr std::array<Action, 2> kActions{Action::A1, Action::A2};

constexpr int action_index(Action a) { return static_cast<int>(a); }
constexpr Action other(Action a) { return a == Action::A1 ? Action::A2 : Action::A1; }

std::string_view to_string(Action a);
Action parse_action(std::string_view text);

using StateId = std::uint64_t;

// Largest horizon for which reward tables are stored densely.
inline constexpr int kMaxStoredHorizon = 24;
// Largest horizon for which the dynamic-programming oracles run.
inline constexpr int kExhaustiveLimit = 22;

/// Index arithmetic for the full binary tree of depth H.
///
/// States are numbered breadth-first: level h holds ids [2^h - 1, 2^{h+1} - 2].
/// Levels are 0-based, so leaves sit at level H - 1 and carry no actions.
class TreeShape {
 public:
  explicit TreeShape(int horizon);

  int horizon() const { return horizon_; }
  std::uint64_t num_states() const { return (std::uint64_t{1} << horizon_) - 1; }
  std::uint64_t num_internal() const { return (std::uint64_t{1} << (horizon_ - 1)) - 1; }
  std::uint64_t num_leaves() const { return std::uint64_t{1} << (horizon_ - 1); }
  std::uint64_t level_size(int level) const { return std::uint64_t{1} << level; }
  StateId first_of_level(int level) const { return (std::uint64_t{1} << level) - 1; }

  bool contains(StateId id) const { return id < num_states(); }
  int level_of(StateId id) const;
  bool is_leaf(StateId id) const;
  StateId child(StateId id, Action a) const;
  std::pair<StateId, Action> parent(StateId id) const;

  /// Leaf s_{i + 2^{H-1} - 1}.
  StateId leaf(std::uint64_t leaf_index) const;
  std::uint64_t leaf_index(StateId leaf) const;

  /// Actions leading from the root to `target`, root first.
  std::vector<Action> path_to(StateId target) const;

  bool operator==(const TreeShape&) const = default;

 private:
  int horizon_;
};

enum class Variant { custom, value_lb, policy_lb, onehot };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

struct RewardEntry {
  StateId state;
  Action action;
  double value;
};

/// Deterministic-transition MDP on the full binary tree.
///
/// Holds mean rewards for every (internal state, action) pair. A nonzero
/// noise amplitude only affects sampling inside an OracleSession; every
/// table computed here uses the mean rewards.
class TreeMDP {
 public:
  /// `rewards` is indexed by 2 * state + action over internal states.
  TreeMDP(int horizon, std::vector<double> rewards, Variant variant = Variant::custom,
          std::optional<StateId> special_leaf = std::nullopt);

  static TreeMDP zero(int horizon);
  static TreeMDP from_entries(int horizon, const std::vector<RewardEntry>& entries,
                              Variant variant = Variant::custom,
                              std::optional<StateId> special_leaf = std::nullopt);

  const TreeShape& shape() const { return shape_; }
  int horizon() const { return shape_.horizon(); }
  Variant variant() const { return variant_; }
  std::optional<StateId> special_leaf() const { return special_leaf_; }

  double reward(StateId s, Action a) const;
  const std::vector<double>& reward_table() const { return rewards_; }
  std::vector<RewardEntry> nonzero_rewards() const;

  double noise_amplitude() const { return noise_amplitude_; }
  std::uint64_t noise_seed() const { return noise_seed_; }
  bool deterministic() const { return noise_amplitude_ == 0.0; }

  /// Copy with bounded reward noise attached (see add_reward_noise).
  TreeMDP with_noise(double amplitude, std::uint64_t seed) const;

  /// E[sampled reward] under the clamped-uniform noise model.
  double expected_reward(StateId s, Action a) const;

 private:
  TreeShape shape_;
  std::vector<double> rewards_;
  Variant variant_;
  std::optional<StateId> special_leaf_;
  double noise_amplitude_ = 0.0;
  std::uint64_t noise_seed_ = 0;
};

/// Deterministic policy on internal states. The linear-rule form
/// argmax_a <theta_h, phi(s,a)> is materialized into this table by
/// greedy_linear_policy (features.hpp).
class Policy {
 public:
  explicit Policy(int horizon, Action fill = Action::A1);
  Policy(int horizon, std::vector<Action> actions);

  static Policy constant(int horizon, Action a) { return Policy(horizon, a); }
  /// Plays the root-to-leaf path actions toward `leaf`, A1 everywhere else.
  static Policy route_to(const TreeShape& shape, StateId leaf);

  int horizon() const { return horizon_; }
  Action operator()(StateId s) const { return actions_.at(s); }
  void set(StateId s, Action a) { actions_.at(s) = a; }
  const std::vector<Action>& actions() const { return actions_; }

  /// Leaf reached from the root.
  StateId terminal_leaf() const;

  bool operator==(const Policy&) const = default;

 private:
  int horizon_;
  std::vector<Action> actions_;
};

struct ValueTables {
  int horizon = 0;
  std::vector<double> q;  // 2 * state + action, internal states only
  std::vector<double> v;  // every state; leaves are 0

  double Q(StateId s, Action a) const { return q[2 * s + action_index(a)]; }
  double V(StateId s) const { return v[s]; }
  /// argmax_a Q(s, a); ties go to A1.
  Action greedy(StateId s) const;
  Policy greedy_policy() const;
};

ValueTables exact_optimal(const TreeMDP& mdp, int limit = kExhaustiveLimit);
ValueTables exact_policy_values(const TreeMDP& mdp, const Policy& pi,
                                int limit = kExhaustiveLimit);

/// Smallest strictly positive max_a' Q*(s,a') - Q*(s,a); +inf when no gap is positive.
double min_positive_gap(const TreeMDP& mdp, int limit = kExhaustiveLimit);

/// Gaps below this are treated as exact ties.
inline constexpr double kTieTolerance = 1e-12;

/// Sum of mean rewards along the path to each leaf, indexed by leaf offset.
std::vector<double> leaf_returns(const TreeMDP& mdp);

}  // namespace linlb
