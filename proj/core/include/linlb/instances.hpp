#pragma once

#include <cstdint>
#include <utility>

#include "linlb/features.hpp"
#include "linlb/tree_mdp.hpp"

namespace linlb {

/// Single rewarding edge: reward 1 on the pair whose child is leaf
/// s_{istar + 2^{H-1} - 1}, zero everywhere else.
TreeMDP make_value_lb(int horizon, std::uint64_t istar);

/// Unflipped policy family: leaf rewards follow the value recursion seeded at
/// V*(root) = 1/2 with a 1/(2H) penalty on every A2 step, so A1 is uniquely
/// optimal everywhere. Odd horizons are rejected unless `allow_odd` is set
/// (small fixtures only; no feature map exists for them).
TreeMDP make_policy_lb_base(int horizon, bool allow_odd = false);

/// Base policy family with leaf s_{istar + 2^{H-1} - 1} raised to reward 1.
TreeMDP make_policy_lb(int horizon, std::uint64_t istar, bool allow_odd = false);

/// Value-LB rewards with one-hot (state, action) features, so every Q^pi is
/// exactly linear. Noise, when requested, is attached with `noise_seed`.
std::pair<TreeMDP, FeatureMap> make_onehot(int horizon, std::uint64_t istar,
                                           double noise_amplitude = 0.0,
                                           std::uint64_t noise_seed = 0);

/// Bounded reward noise: each nonzero mean reward m is sampled as
/// clamp(m + U(-amplitude, amplitude), 0, 1) and the running return is capped
/// at 1. Zero-mean rewards stay exactly zero.
TreeMDP add_reward_noise(const TreeMDP& mdp, double amplitude, std::uint64_t seed);

}  // namespace linlb
