#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "linlb/errors.hpp"
#include "linlb/instances.hpp"
#include "linlb/oracle.hpp"

namespace linlb {
namespace {

TEST(ValueLb, Examples) {
  const TreeMDP a = make_value_lb(3, 2);
  EXPECT_EQ(a.special_leaf(), StateId{5});
  EXPECT_EQ(a.reward(2, Action::A1), 1.0);
  const TreeMDP b = make_value_lb(3, 0);
  EXPECT_EQ(b.special_leaf(), StateId{3});
  EXPECT_EQ(b.reward(1, Action::A1), 1.0);
  const TreeMDP c = make_value_lb(2, 1);
  EXPECT_EQ(c.special_leaf(), StateId{2});
  EXPECT_EQ(c.reward(0, Action::A2), 1.0);
  EXPECT_EQ(c.variant(), Variant::value_lb);
}

TEST(ValueLb, Errors) {
  EXPECT_THROW(make_value_lb(3, 4), IndexError);
  EXPECT_THROW(make_value_lb(1, 0), InvalidArgument);
}

TEST(ValueLb, SingleRewardSingleWinningLeaf) {
  for (int H = 2; H <= 14; ++H) {
    const std::uint64_t leaves = std::uint64_t{1} << (H - 1);
    for (std::uint64_t istar : {std::uint64_t{0}, leaves / 3, leaves - 1}) {
      const TreeMDP mdp = make_value_lb(H, istar);
      ASSERT_EQ(mdp.nonzero_rewards().size(), 1u);
      const auto returns = leaf_returns(mdp);
      ASSERT_EQ(std::count(returns.begin(), returns.end(), 1.0), 1);
      ASSERT_EQ(returns[istar], 1.0);
      for (double r : returns) ASSERT_TRUE(r == 0.0 || r == 1.0);
      if (H <= 12) {
        ASSERT_EQ(exact_optimal(mdp).V(0), 1.0);
      }
    }
  }
}

TEST(PolicyLb, H4PreFlipLeafRewards) {
  const TreeMDP mdp = make_policy_lb_base(4);
  const std::vector<double> expected = {0.5, 0.375, 0.375, 0.25, 0.375, 0.25, 0.25, 0.125};
  const TreeShape& t = mdp.shape();
  for (std::uint64_t i = 0; i < 8; ++i) {
    const auto [s, a] = t.parent(t.leaf(i));
    EXPECT_DOUBLE_EQ(mdp.reward(s, a), expected[i]) << "leaf " << i;
  }
}

TEST(PolicyLb, H3Fixture) {
  const TreeMDP base = make_policy_lb_base(3, /*allow_odd=*/true);
  EXPECT_NEAR(base.reward(1, Action::A1), 0.5, 1e-15);         // s_3
  EXPECT_NEAR(base.reward(1, Action::A2), 1.0 / 3.0, 1e-15);   // s_4
  EXPECT_NEAR(base.reward(2, Action::A1), 1.0 / 3.0, 1e-15);   // s_5
  EXPECT_NEAR(base.reward(2, Action::A2), 1.0 / 6.0, 1e-15);   // s_6
  const TreeMDP flipped = make_policy_lb(3, 2, /*allow_odd=*/true);
  EXPECT_EQ(flipped.reward(2, Action::A1), 1.0);
  EXPECT_NEAR(min_positive_gap(flipped), 1.0 / 6.0, 1e-15);
}

TEST(PolicyLb, ParityAndRange) {
  EXPECT_THROW(make_policy_lb(5, 0), ParityError);
  EXPECT_THROW(make_policy_lb_base(7), ParityError);
  EXPECT_THROW(make_policy_lb(4, 8), IndexError);
}

TEST(PolicyLb, StructureExhaustive) {
  for (int H = 4; H <= 12; H += 2) {
    const TreeMDP base = make_policy_lb_base(H);
    const ValueTables bt = exact_optimal(base);
    EXPECT_NEAR(bt.V(0), 0.5, 1e-12);
    for (StateId s = 0; s < base.shape().num_internal(); ++s) {
      ASSERT_EQ(bt.greedy(s), Action::A1);
      ASSERT_GT(bt.Q(s, Action::A1) - bt.Q(s, Action::A2), 1e-9);
    }
    const std::uint64_t leaves = std::uint64_t{1} << (H - 1);
    for (std::uint64_t istar : {std::uint64_t{0}, leaves / 2 + 1, leaves - 1}) {
      const TreeMDP mdp = make_policy_lb(H, istar);
      const ValueTables t = exact_optimal(mdp);
      const TreeShape& shape = mdp.shape();
      EXPECT_EQ(t.greedy_policy().terminal_leaf(), shape.leaf(istar));
      EXPECT_NEAR(min_positive_gap(mdp), 1.0 / (2.0 * H), 1e-12);
      for (StateId s = 0; s < shape.num_internal(); ++s) {
        ASSERT_GT(std::abs(t.Q(s, Action::A1) - t.Q(s, Action::A2)), 1e-9) << "tie at " << s;
      }
      for (double r : leaf_returns(mdp)) ASSERT_TRUE(r >= 0.0 && r <= 1.0);
    }
  }
}

TEST(Onehot, Dimensions) {
  auto [m3, f3] = make_onehot(3, 2);
  EXPECT_EQ(f3.dim(), 14);
  EXPECT_EQ(m3.variant(), Variant::onehot);
  EXPECT_EQ(m3.reward(2, Action::A1), 1.0);
  auto [m2, f2] = make_onehot(2, 0);
  EXPECT_EQ(f2.dim(), 6);
  EXPECT_THROW(make_onehot(16, 0), CapacityError);
}

TEST(Noise, ZeroAmplitudeIsIdentity) {
  const TreeMDP mdp = make_value_lb(4, 3);
  const TreeMDP same = add_reward_noise(mdp, 0.0, 9);
  EXPECT_TRUE(same.deterministic());
  EXPECT_EQ(same.reward_table(), mdp.reward_table());
  EXPECT_THROW(add_reward_noise(mdp, 1.01, 0), InvalidArgument);
}

TEST(Noise, SampleMeanAndVariation) {
  auto mdp = std::make_shared<const TreeMDP>(add_reward_noise(make_value_lb(3, 2), 0.2, 5));
  OracleSession session(QueryMode::generative, mdp, std::nullopt, 11);
  const Policy pi(3);
  const double a = session.gm_rollout(0, Action::A2, pi);
  const double b = session.gm_rollout(0, Action::A2, pi);
  EXPECT_NE(a, b);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += session.gm_rollout(0, Action::A2, pi);
  EXPECT_NEAR(sum / 10000, mdp->expected_reward(2, Action::A1), 0.01);
}

TEST(Noise, ClampRange) {
  auto mdp = std::make_shared<const TreeMDP>(add_reward_noise(make_value_lb(3, 2), 0.5, 1));
  OracleSession session(QueryMode::generative, mdp, std::nullopt, 2);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double r = session.gm_probe(2, Action::A1).reward;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_GE(lo, 0.5);
  EXPECT_LT(lo, 0.51);
  EXPECT_EQ(hi, 1.0);
  EXPECT_NEAR(mdp->expected_reward(2, Action::A1), 0.875, 1e-12);
}

}  // namespace
}  // namespace linlb
