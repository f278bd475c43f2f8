#include "linlb/tree_mdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "linlb/errors.hpp"

namespace linlb {

std::string_view to_string(Action a) { return a == Action::A1 ? "A1" : "A2"; }

Action parse_action(std::string_view text) {
  if (text == "A1" || text == "a1" || text == "1") return Action::A1;
  if (text == "A2" || text == "a2" || text == "2") return Action::A2;
  throw InvalidArgument("unknown action '" + std::string(text) + "'");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::value_lb: return "value-lb";
    case Variant::policy_lb: return "policy-lb";
    case Variant::onehot: return "onehot";
    case Variant::custom: break;
  }
  return "custom";
}

Variant parse_variant(std::string_view text) {
  if (text == "value-lb") return Variant::value_lb;
  if (text == "policy-lb") return Variant::policy_lb;
  if (text == "onehot") return Variant::onehot;
  if (text == "custom") return Variant::custom;
  throw InvalidArgument("unknown variant '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// TreeShape

TreeShape::TreeShape(int horizon) : horizon_(horizon) {
  if (horizon < 1 || horizon > 62) {
    throw InvalidArgument("horizon must lie in [1, 62], got " + std::to_string(horizon));
  }
}

int TreeShape::level_of(StateId id) const {
  if (!contains(id)) {
    throw IndexError("state " + std::to_string(id) + " outside tree of horizon " +
                     std::to_string(horizon_));
  }
  return std::bit_width(id + 1) - 1;
}

bool TreeShape::is_leaf(StateId id) const { return level_of(id) == horizon_ - 1; }

StateId TreeShape::child(StateId id, Action a) const {
  if (is_leaf(id)) throw NoChildError("leaf state " + std::to_string(id) + " has no children");
  return 2 * id + 1 + static_cast<StateId>(action_index(a));
}

std::pair<StateId, Action> TreeShape::parent(StateId id) const {
  level_of(id);  // range check
  if (id == 0) throw RootError("the root has no parent");
  return {(id - 1) / 2, (id % 2 == 1) ? Action::A1 : Action::A2};
}

StateId TreeShape::leaf(std::uint64_t leaf_index) const {
  if (leaf_index >= num_leaves()) {
    throw IndexError("leaf index " + std::to_string(leaf_index) + " out of range [0, " +
                     std::to_string(num_leaves()) + ")");
  }
  return leaf_index + num_leaves() - 1;
}

std::uint64_t TreeShape::leaf_index(StateId leaf) const {
  if (!is_leaf(leaf)) throw IndexError("state " + std::to_string(leaf) + " is not a leaf");
  return leaf - (num_leaves() - 1);
}

std::vector<Action> TreeShape::path_to(StateId target) const {
  std::vector<Action> path(static_cast<std::size_t>(level_of(target)));
  for (StateId s = target; s != 0;) {
    auto [p, a] = parent(s);
    path[static_cast<std::size_t>(level_of(p))] = a;
    s = p;
  }
  return path;
}

// ---------------------------------------------------------------------------
// TreeMDP

namespace {

void require_storable(int horizon) {
  if (horizon < 1 || horizon > kMaxStoredHorizon) {
    throw CapacityError("horizon " + std::to_string(horizon) + " exceeds storage limit " +
                        std::to_string(kMaxStoredHorizon));
  }
}

// Antiderivative of clamp(x, 0, 1).
double clamp_integral(double x) {
  if (x <= 0.0) return 0.0;
  if (x <= 1.0) return 0.5 * x * x;
  return 0.5 + (x - 1.0);
}

}  // namespace

TreeMDP::TreeMDP(int horizon, std::vector<double> rewards, Variant variant,
                 std::optional<StateId> special_leaf)
    : shape_((require_storable(horizon), horizon)),
      rewards_(std::move(rewards)),
      variant_(variant),
      special_leaf_(special_leaf) {
  if (rewards_.size() != 2 * shape_.num_internal()) {
    throw DimensionError("reward table must have 2 * (2^(H-1) - 1) entries");
  }
  for (double r : rewards_) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("mean rewards must lie in [0, 1]");
  }
  if (special_leaf_ && !shape_.is_leaf(*special_leaf_)) {
    throw IndexError("special leaf must be a leaf state");
  }
  // Every root-to-leaf return must stay in [0, 1].
  std::vector<double> acc(shape_.num_states(), 0.0);
  for (StateId s = 0; s < shape_.num_internal(); ++s) {
    for (Action a : kActions) {
      const StateId c = 2 * s + 1 + static_cast<StateId>(action_index(a));
      acc[c] = acc[s] + rewards_[2 * s + static_cast<StateId>(action_index(a))];
      if (acc[c] > 1.0 + 1e-12) {
        throw InvalidArgument("a root-to-leaf return exceeds 1 at state " + std::to_string(c));
      }
    }
  }
}

TreeMDP TreeMDP::zero(int horizon) {
  require_storable(horizon);
  return TreeMDP(horizon, std::vector<double>(2 * TreeShape(horizon).num_internal(), 0.0));
}

TreeMDP TreeMDP::from_entries(int horizon, const std::vector<RewardEntry>& entries,
                              Variant variant, std::optional<StateId> special_leaf) {
  require_storable(horizon);
  const TreeShape shape(horizon);
  std::vector<double> table(2 * shape.num_internal(), 0.0);
  for (const auto& e : entries) {
    if (e.state >= shape.num_internal()) {
      throw IndexError("reward entry on non-internal state " + std::to_string(e.state));
    }
    table[2 * e.state + static_cast<StateId>(action_index(e.action))] = e.value;
  }
  return TreeMDP(horizon, std::move(table), variant, special_leaf);
}

double TreeMDP::reward(StateId s, Action a) const {
  if (s >= shape_.num_internal()) {
    shape_.level_of(s);
    throw NoChildError("leaf state " + std::to_string(s) + " has no actions");
  }
  return rewards_[2 * s + static_cast<StateId>(action_index(a))];
}

std::vector<RewardEntry> TreeMDP::nonzero_rewards() const {
  std::vector<RewardEntry> out;
  for (StateId s = 0; s < shape_.num_internal(); ++s) {
    for (Action a : kActions) {
      const double r = rewards_[2 * s + static_cast<StateId>(action_index(a))];
      if (r != 0.0) out.push_back({s, a, r});
    }
  }
  return out;
}

TreeMDP TreeMDP::with_noise(double amplitude, std::uint64_t seed) const {
  if (!(amplitude >= 0.0 && amplitude <= 1.0)) {
    throw InvalidArgument("noise amplitude must lie in [0, 1]");
  }
  TreeMDP copy = *this;
  copy.noise_amplitude_ = amplitude;
  copy.noise_seed_ = amplitude == 0.0 ? 0 : seed;
  return copy;
}

double TreeMDP::expected_reward(StateId s, Action a) const {
  const double m = reward(s, a);
  if (noise_amplitude_ == 0.0 || m == 0.0) return m;
  const double lo = m - noise_amplitude_;
  const double hi = m + noise_amplitude_;
  return (clamp_integral(hi) - clamp_integral(lo)) / (hi - lo);
}

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(int horizon, Action fill)
    : horizon_(horizon), actions_(TreeShape(horizon).num_internal(), fill) {}

Policy::Policy(int horizon, std::vector<Action> actions)
    : horizon_(horizon), actions_(std::move(actions)) {
  if (actions_.size() != TreeShape(horizon).num_internal()) {
    throw DimensionError("policy table must cover every internal state");
  }
}

Policy Policy::route_to(const TreeShape& shape, StateId leaf) {
  Policy pi(shape.horizon());
  StateId s = 0;
  for (Action a : shape.path_to(leaf)) {
    pi.set(s, a);
    s = shape.child(s, a);
  }
  return pi;
}

StateId Policy::terminal_leaf() const {
  const TreeShape shape(horizon_);
  StateId s = 0;
  while (s < shape.num_internal()) s = shape.child(s, actions_[s]);
  return s;
}

// ---------------------------------------------------------------------------
// Dynamic programming

Action ValueTables::greedy(StateId s) const {
  return Q(s, Action::A2) > Q(s, Action::A1) ? Action::A2 : Action::A1;
}

Policy ValueTables::greedy_policy() const {
  Policy pi(horizon);
  for (StateId s = 0; s < pi.actions().size(); ++s) pi.set(s, greedy(s));
  return pi;
}

namespace {

void require_exhaustive(const TreeMDP& mdp, int limit) {
  if (mdp.horizon() > limit) {
    throw CapacityError("exact DP limited to H <= " + std::to_string(limit) + ", got H = " +
                        std::to_string(mdp.horizon()));
  }
}

template <typename Choose>
ValueTables backward_induction(const TreeMDP& mdp, Choose choose) {
  const TreeShape& shape = mdp.shape();
  ValueTables t;
  t.horizon = mdp.horizon();
  t.q.assign(2 * shape.num_internal(), 0.0);
  t.v.assign(shape.num_states(), 0.0);
  const auto& r = mdp.reward_table();
  for (StateId s = shape.num_internal(); s-- > 0;) {
    t.q[2 * s] = r[2 * s] + t.v[2 * s + 1];
    t.q[2 * s + 1] = r[2 * s + 1] + t.v[2 * s + 2];
    t.v[s] = t.q[2 * s + static_cast<StateId>(action_index(choose(t, s)))];
  }
  return t;
}

}  // namespace

ValueTables exact_optimal(const TreeMDP& mdp, int limit) {
  require_exhaustive(mdp, limit);
  return backward_induction(mdp, [](const ValueTables& t, StateId s) { return t.greedy(s); });
}

ValueTables exact_policy_values(const TreeMDP& mdp, const Policy& pi, int limit) {
  require_exhaustive(mdp, limit);
  if (pi.horizon() != mdp.horizon()) throw DimensionError("policy horizon mismatch");
  return backward_induction(mdp, [&](const ValueTables&, StateId s) { return pi(s); });
}

double min_positive_gap(const TreeMDP& mdp, int limit) {
  const ValueTables t = exact_optimal(mdp, limit);
  double best = std::numeric_limits<double>::infinity();
  for (StateId s = 0; s < mdp.shape().num_internal(); ++s) {
    const double gap = std::abs(t.Q(s, Action::A1) - t.Q(s, Action::A2));
    if (gap > kTieTolerance) best = std::min(best, gap);
  }
  return best;
}

std::vector<double> leaf_returns(const TreeMDP& mdp) {
  const TreeShape& shape = mdp.shape();
  std::vector<double> acc(shape.num_states(), 0.0);
  const auto& r = mdp.reward_table();
  for (StateId s = 0; s < shape.num_internal(); ++s) {
    acc[2 * s + 1] = acc[s] + r[2 * s];
    acc[2 * s + 2] = acc[s] + r[2 * s + 1];
  }
  return {acc.begin() + static_cast<std::ptrdiff_t>(shape.num_internal()), acc.end()};
}

}  // namespace linlb
