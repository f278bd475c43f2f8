#include "linlb/instances.hpp"


#include "linlb/errors.hpp"

namespace linlb {

TreeMDP make_value_lb(int horizon, std::uint64_t istar) {
  if (horizon < 2) throw InvalidArgument("value-LB needs H >= 2");
  if (horizon > kMaxStoredHorizon) throw CapacityError("horizon exceeds storage limit");
  const TreeShape shape(horizon);
  const StateId leaf = shape.leaf(istar);
  const auto [s, a] = shape.parent(leaf);
  return TreeMDP::from_entries(horizon, {{s, a, 1.0}}, Variant::value_lb, leaf);
}

TreeMDP make_policy_lb_base(int horizon, bool allow_odd) {
  if (horizon < 2) throw InvalidArgument("policy-LB needs H >= 2");
  if (horizon % 2 != 0 && !allow_odd) {
    throw ParityError("policy-LB requires an even horizon, got " + std::to_string(horizon));
  }
  if (horizon > kMaxStoredHorizon) throw CapacityError("horizon exceeds storage limit");
  const TreeShape shape(horizon);
  const double step = 1.0 / (2.0 * horizon);
  std::vector<double> rewards(2 * shape.num_internal(), 0.0);
  const int last = horizon - 2;
  for (StateId s = shape.first_of_level(last); s < shape.first_of_level(last + 1); ++s) {
    // V*(s) = 1/2 - (#A2 steps on the path to s) / (2H). Even children of the
    // tree (ids 2i + 2) are the A2 children.
    int a2_steps = 0;
    for (StateId t = s; t != 0; t = (t - 1) / 2) a2_steps += (t % 2 == 0) ? 1 : 0;
    const double v = 0.5 - a2_steps * step;
    rewards[2 * s] = v;
    rewards[2 * s + 1] = v - step;
  }
  return TreeMDP(horizon, std::move(rewards), Variant::policy_lb);
}

TreeMDP make_policy_lb(int horizon, std::uint64_t istar, bool allow_odd) {
  const TreeMDP base = make_policy_lb_base(horizon, allow_odd);
  const StateId leaf = base.shape().leaf(istar);
  const auto [s, a] = base.shape().parent(leaf);
  std::vector<double> rewards = base.reward_table();
  rewards[2 * s + static_cast<StateId>(action_index(a))] = 1.0;
  return TreeMDP(horizon, std::move(rewards), Variant::policy_lb, leaf);
}

std::pair<TreeMDP, FeatureMap> make_onehot(int horizon, std::uint64_t istar,
                                           double noise_amplitude, std::uint64_t noise_seed) {
  const TreeMDP base = make_value_lb(horizon, istar);
  TreeMDP mdp(horizon, base.reward_table(), Variant::onehot, base.special_leaf());
  return {add_reward_noise(mdp, noise_amplitude, noise_seed), FeatureMap::onehot(horizon)};
}

TreeMDP add_reward_noise(const TreeMDP& mdp, double amplitude, std::uint64_t seed) {
  return mdp.with_noise(amplitude, seed);
}

}  // namespace linlb
