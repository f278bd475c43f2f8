#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "brute_force.hpp"
#include "linlb/errors.hpp"
#include "linlb/instances.hpp"
#include "linlb/tree_mdp.hpp"

namespace linlb {
namespace {

using testing::brute_q_pi;
using testing::brute_q_star;
using testing::random_policy;
using testing::random_tree;

TEST(TreeShape, LevelOfExamples) {
  const TreeShape t(4);
  EXPECT_EQ(t.level_of(0), 0);
  EXPECT_EQ(t.level_of(5), 2);
  EXPECT_EQ(t.level_of(6), 2);
  EXPECT_EQ(t.level_of(14), 3);
  EXPECT_THROW(t.level_of(15), IndexError);
}

TEST(TreeShape, LevelRanges) {
  const TreeShape t(6);
  for (int h = 0; h < 6; ++h) {
    EXPECT_EQ(t.first_of_level(h), (StateId{1} << h) - 1);
    EXPECT_EQ(t.level_size(h), std::uint64_t{1} << h);
    for (StateId s = t.first_of_level(h); s < t.first_of_level(h) + t.level_size(h); ++s) {
      EXPECT_EQ(t.level_of(s), h);
    }
  }
}

TEST(TreeShape, ChildExamples) {
  const TreeShape t(3);
  EXPECT_EQ(t.child(0, Action::A2), 2u);
  EXPECT_EQ(t.child(2, Action::A1), 5u);
  EXPECT_EQ(t.child(0, Action::A1), 1u);
  EXPECT_THROW(t.child(3, Action::A1), NoChildError);
  EXPECT_THROW(t.child(7, Action::A1), IndexError);
}

TEST(TreeShape, ParentExamples) {
  const TreeShape t(3);
  EXPECT_EQ(t.parent(5), std::make_pair(StateId{2}, Action::A1));
  EXPECT_EQ(t.parent(1), std::make_pair(StateId{0}, Action::A1));
  EXPECT_EQ(t.parent(6), std::make_pair(StateId{2}, Action::A2));
  EXPECT_THROW(t.parent(0), RootError);
}

TEST(TreeShape, NavigationInverseExhaustive) {
  for (int H = 1; H <= 12; ++H) {
    const TreeShape t(H);
    for (StateId s = 0; s < t.num_internal(); ++s) {
      for (Action a : kActions) {
        const StateId c = t.child(s, a);
        ASSERT_EQ(t.parent(c), std::make_pair(s, a));
        ASSERT_EQ(t.level_of(c), t.level_of(s) + 1);
      }
    }
  }
}

TEST(TreeShape, LeafIndexRoundTripAndPaths) {
  const TreeShape t(5);
  for (std::uint64_t i = 0; i < t.num_leaves(); ++i) {
    const StateId leaf = t.leaf(i);
    EXPECT_TRUE(t.is_leaf(leaf));
    EXPECT_EQ(t.leaf_index(leaf), i);
    StateId s = 0;
    for (Action a : t.path_to(leaf)) s = t.child(s, a);
    EXPECT_EQ(s, leaf);
  }
  EXPECT_THROW(t.leaf(t.num_leaves()), IndexError);
}

TEST(TreeShape, HorizonRange) {
  EXPECT_THROW(TreeShape(0), InvalidArgument);
  const TreeShape one(1);
  EXPECT_EQ(one.num_states(), 1u);
  EXPECT_TRUE(one.is_leaf(0));
}

TEST(TreeMdp, RejectsBadRewards) {
  EXPECT_THROW(TreeMDP(3, std::vector<double>(5, 0.0)), DimensionError);
  std::vector<double> r(6, 0.0);
  r[0] = 1.5;
  EXPECT_THROW(TreeMDP(3, r), InvalidArgument);
  r[0] = 0.6;
  r[2] = 0.6;  // (s1, A1) after (s0, A1): path total 1.2
  EXPECT_THROW(TreeMDP(3, r), InvalidArgument);
  EXPECT_THROW(TreeMDP(3, std::vector<double>(6, 0.0), Variant::custom, StateId{2}), IndexError);
}

TEST(TreeMdp, RewardOnLeafThrows) {
  const TreeMDP mdp = TreeMDP::zero(3);
  EXPECT_THROW(mdp.reward(3, Action::A1), NoChildError);
}

TEST(TreeMdp, NonzeroRewardsRoundTrip) {
  const TreeMDP mdp = make_value_lb(4, 5);
  const auto entries = mdp.nonzero_rewards();
  ASSERT_EQ(entries.size(), 1u);
  const TreeMDP back = TreeMDP::from_entries(4, entries, mdp.variant(), mdp.special_leaf());
  EXPECT_EQ(back.reward_table(), mdp.reward_table());
}

TEST(ExactOptimal, ValueLbH3Example) {
  const TreeMDP mdp = make_value_lb(3, 2);
  const ValueTables t = exact_optimal(mdp);
  EXPECT_EQ(t.Q(0, Action::A2), 1.0);
  EXPECT_EQ(t.Q(0, Action::A1), 0.0);
  EXPECT_EQ(t.Q(2, Action::A1), 1.0);
  EXPECT_EQ(t.Q(1, Action::A1), 0.0);
  EXPECT_EQ(t.Q(1, Action::A2), 0.0);
  EXPECT_EQ(t.V(0), 1.0);
}

TEST(ExactOptimal, PolicyLbH3PreFlip) {
  const TreeMDP mdp = make_policy_lb_base(3, /*allow_odd=*/true);
  const ValueTables t = exact_optimal(mdp);
  EXPECT_NEAR(t.V(0), 0.5, 1e-15);
  EXPECT_NEAR(t.V(1), 0.5, 1e-15);
  EXPECT_NEAR(t.V(2), 1.0 / 3.0, 1e-15);
}

TEST(ExactOptimal, ZeroTree) {
  const ValueTables t = exact_optimal(TreeMDP::zero(5));
  for (double q : t.q) EXPECT_EQ(q, 0.0);
  for (double v : t.v) EXPECT_EQ(v, 0.0);
}

TEST(ExactOptimal, CapacityLimit) {
  EXPECT_THROW(exact_optimal(TreeMDP::zero(6), 5), CapacityError);
  EXPECT_THROW(exact_policy_values(TreeMDP::zero(6), Policy(6), 5), CapacityError);
  EXPECT_NO_THROW(exact_optimal(TreeMDP::zero(5), 5));
}

TEST(ExactOptimal, MatchesPathEnumeration) {
  for (int H = 2; H <= 9; ++H) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const TreeMDP mdp = random_tree(H, seed * 31 + static_cast<std::uint64_t>(H));
      const ValueTables t = exact_optimal(mdp);
      for (StateId s = 0; s < mdp.shape().num_internal(); ++s) {
        for (Action a : kActions) ASSERT_NEAR(t.Q(s, a), brute_q_star(mdp, s, a), 1e-12);
      }
    }
  }
}

TEST(ExactOptimal, BellmanConsistencyExhaustive) {
  for (int H = 2; H <= 12; ++H) {
    const TreeMDP mdp = random_tree(H, static_cast<std::uint64_t>(H));
    const ValueTables t = exact_optimal(mdp);
    const TreeShape& shape = mdp.shape();
    for (StateId s = 0; s < shape.num_internal(); ++s) {
      for (Action a : kActions) {
        ASSERT_NEAR(t.Q(s, a), mdp.reward(s, a) + t.V(shape.child(s, a)), 1e-12);
      }
      ASSERT_EQ(t.V(s), std::max(t.Q(s, Action::A1), t.Q(s, Action::A2)));
    }
    for (StateId s = shape.num_internal(); s < shape.num_states(); ++s) ASSERT_EQ(t.V(s), 0.0);
    for (double v : t.v) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  }
}

TEST(ExactPolicyValues, Examples) {
  const TreeMDP mdp = make_value_lb(3, 2);
  EXPECT_EQ(exact_policy_values(mdp, Policy::constant(3, Action::A1)).V(0), 0.0);
  EXPECT_EQ(exact_policy_values(mdp, Policy::route_to(mdp.shape(), 5)).V(0), 1.0);

  const ValueTables opt = exact_optimal(mdp);
  const Policy star = opt.greedy_policy();
  const ValueTables at_star = exact_policy_values(mdp, star);
  EXPECT_EQ(at_star.q, opt.q);
  for (StateId s = 0; s < 3; ++s) EXPECT_EQ(at_star.V(s), at_star.Q(s, star(s)));
}

TEST(ExactPolicyValues, MatchesSimulationAndIsDominated) {
  for (int H = 2; H <= 10; ++H) {
    const TreeMDP mdp = random_tree(H, 1000 + static_cast<std::uint64_t>(H));
    const ValueTables opt = exact_optimal(mdp);
    for (std::uint64_t k = 0; k < 100; ++k) {
      const Policy pi = random_policy(H, k * 13 + static_cast<std::uint64_t>(H));
      const ValueTables t = exact_policy_values(mdp, pi);
      for (StateId s = 0; s < mdp.shape().num_internal(); ++s) {
        for (Action a : kActions) {
          ASSERT_LE(t.Q(s, a), opt.Q(s, a) + 1e-12);
          if (k < 5) {
            ASSERT_NEAR(t.Q(s, a), brute_q_pi(mdp, pi, s, a), 1e-12);
          }
        }
        ASSERT_EQ(t.V(s), t.Q(s, pi(s)));
      }
    }
  }
}

TEST(ExactPolicyValues, HorizonMismatch) {
  EXPECT_THROW(exact_policy_values(TreeMDP::zero(4), Policy(3)), DimensionError);
}

TEST(MinPositiveGap, Examples) {
  EXPECT_EQ(min_positive_gap(make_value_lb(3, 2)), 1.0);
  EXPECT_NEAR(min_positive_gap(make_policy_lb(3, 2, /*allow_odd=*/true)), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(min_positive_gap(TreeMDP::zero(4)), std::numeric_limits<double>::infinity());
}

TEST(ValueTables, GreedyTiesGoToA1) {
  const ValueTables t = exact_optimal(make_value_lb(3, 2));
  EXPECT_EQ(t.greedy(1), Action::A1);  // both actions worth 0
  EXPECT_EQ(t.greedy(0), Action::A2);
}

TEST(Policy, RouteToAndTerminalLeaf) {
  const TreeShape t(4);
  for (std::uint64_t i = 0; i < t.num_leaves(); ++i) {
    EXPECT_EQ(Policy::route_to(t, t.leaf(i)).terminal_leaf(), t.leaf(i));
  }
  EXPECT_EQ(Policy::constant(4, Action::A1).terminal_leaf(), 7u);
  EXPECT_EQ(Policy::constant(4, Action::A2).terminal_leaf(), 14u);
  EXPECT_THROW(Policy(3, std::vector<Action>(2)), DimensionError);
}

TEST(LeafReturns, MatchPolicyValues) {
  const TreeMDP mdp = random_tree(6, 5);
  const auto returns = leaf_returns(mdp);
  for (std::uint64_t i = 0; i < returns.size(); ++i) {
    const Policy pi = Policy::route_to(mdp.shape(), mdp.shape().leaf(i));
    EXPECT_NEAR(returns[i], exact_policy_values(mdp, pi).V(0), 1e-12);
    EXPECT_GE(returns[i], 0.0);
    EXPECT_LE(returns[i], 1.0);
  }
}

TEST(Noise, AmplitudeValidationAndExpectedReward) {
  const TreeMDP mdp = make_value_lb(3, 2);
  EXPECT_THROW(mdp.with_noise(-0.1, 0), InvalidArgument);
  EXPECT_THROW(mdp.with_noise(1.5, 0), InvalidArgument);
  const TreeMDP noisy = mdp.with_noise(0.2, 3);
  EXPECT_FALSE(noisy.deterministic());
  // clamp(1 + U(-0.2, 0.2), 0, 1) has mean 1 - 0.2/4.
  EXPECT_NEAR(noisy.expected_reward(2, Action::A1), 0.95, 1e-12);
  EXPECT_EQ(noisy.expected_reward(1, Action::A1), 0.0);
  EXPECT_EQ(mdp.expected_reward(2, Action::A1), 1.0);
  // DP keeps using mean rewards.
  EXPECT_EQ(exact_optimal(noisy).V(0), 1.0);
}

TEST(ActionNames, RoundTrip) {
  for (Action a : kActions) EXPECT_EQ(parse_action(to_string(a)), a);
  EXPECT_THROW(parse_action("A3"), InvalidArgument);
  for (Variant v : {Variant::custom, Variant::value_lb, Variant::policy_lb, Variant::onehot}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
}

}  // namespace
}  // namespace linlb
