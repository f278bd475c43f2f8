#include <gtest/gtest.h>

#include <cmath>

#include "brute_force.hpp"
#include "linlb/errors.hpp"
#include "linlb/features.hpp"
#include "linlb/instances.hpp"

namespace linlb {
namespace {

double brute_max_abs_inner(const RowMatrix& v) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < v.rows(); ++j) worst = std::max(worst, std::abs(v.row(i).dot(v.row(j))));
  }
  return worst;
}

TEST(JlDimension, Formula) {
  EXPECT_EQ(jl_dimension(8, 0.9), 21);
  EXPECT_EQ(jl_dimension(4096, 0.5), 267);
  EXPECT_EQ(jl_dimension(3, 0.999), 9);
  EXPECT_EQ(jl_dimension(256, 0.7), 91);  // half of d = 182 at H = 8
  EXPECT_THROW(jl_dimension(8, 1.0), InvalidArgument);
}

TEST(SampleJl, SmallSetsPassExhaustiveCheck) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const VectorSet s = sample_jl_set(8, 0.9, seed);
    ASSERT_EQ(s.size(), 8u);
    ASSERT_EQ(s.dim(), 21);
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_NEAR(s.row(i).norm(), 1.0, 1e-12);
    ASSERT_LE(brute_max_abs_inner(s.vectors), 0.9);
    ASSERT_NEAR(max_abs_offdiag_inner(s.vectors), brute_max_abs_inner(s.vectors), 1e-14);
  }
  const VectorSet t = sample_jl_set(3, 0.999, 4);
  EXPECT_EQ(t.dim(), 9);
  EXPECT_LE(brute_max_abs_inner(t.vectors), 0.999);
}

TEST(SampleJl, ReproducibleAndValidated) {
  const VectorSet a = sample_jl_set(64, 0.6, 42);
  const VectorSet b = sample_jl_set(64, 0.6, 42);
  EXPECT_EQ(a.vectors, b.vectors);
  EXPECT_NE(a.vectors, sample_jl_set(64, 0.6, 43).vectors);
  EXPECT_THROW(sample_jl_set(2, 0.5, 0), InvalidArgument);
  EXPECT_THROW(sample_jl_set(8, 0.5, 0, 0), InvalidArgument);
}

TEST(SampleJl, BlockwiseReductionMatchesBruteForce) {
  // More rows than one reduction block, to cover the block seams.
  const VectorSet s = sample_jl_set(1100, 0.9, 3);
  EXPECT_DOUBLE_EQ(max_abs_offdiag_inner(s.vectors), brute_max_abs_inner(s.vectors));
}

TEST(RandomUnitTail, EmpiricalBound) {
  // Pr[u_1^2 > beta/d] <= exp(-beta/4) for uniform unit vectors in R^d.
  const int d = 64;
  const int samples = 20000;
  Rng rng = make_rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double beta : {8.0, 16.0, 24.0}) {
    int hits = 0;
    for (int k = 0; k < samples; ++k) {
      Vector u(d);
      for (int j = 0; j < d; ++j) u(j) = g(rng);
      u.normalize();
      hits += u(0) * u(0) > beta / d ? 1 : 0;
    }
    const double bound = std::exp(-beta / 4.0);
    const double se = std::sqrt(bound * (1.0 - bound) / samples);
    EXPECT_LE(static_cast<double>(hits) / samples, bound + 3.0 * se) << "beta " << beta;
  }
}

TEST(GreedyPacking, Examples) {
  const PackingResult planar = greedy_packing(2, 0.999, 4, 1);
  EXPECT_TRUE(planar.feasible());
  EXPECT_LE(max_offdiag_inner(planar.set.vectors), 1.0 - 0.999 / 2 + 1e-15);

  const PackingResult five = greedy_packing(5, 0.01, 64, 2);
  ASSERT_TRUE(five.feasible());
  EXPECT_EQ(five.set.size(), 64u);
  EXPECT_LE(max_offdiag_inner(five.set.vectors), 0.995);

  const PackingResult one = greedy_packing(3, 0.5, 1, 3);
  ASSERT_EQ(one.set.size(), 1u);
  EXPECT_NEAR(one.set.row(0).norm(), 1.0, 1e-12);
}

TEST(GreedyPacking, ReportsInfeasibility) {
  // Inner products <= 0.505 leave room for at most 6 points on the circle.
  const PackingResult r = greedy_packing(2, 0.99, 10, 5, 2000);
  EXPECT_FALSE(r.feasible());
  EXPECT_LT(r.set.size(), 10u);
  EXPECT_GT(r.set.size(), 0u);
  EXPECT_THROW(greedy_packing(1, 0.5, 2, 0), InvalidArgument);
  EXPECT_THROW(greedy_packing(3, 1.0, 2, 0), InvalidArgument);
}

TEST(GreedyPacking, SeparatorExhaustive) {
  const PackingResult r = greedy_packing(3, 0.2, 30, 8);
  ASSERT_TRUE(r.feasible());
  const auto& v = r.set.vectors;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    EXPECT_NEAR(separator_value(v.row(i).transpose(), v.row(i).transpose(), 0.2), 0.05, 1e-12);
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
      if (i != j) {
        ASSERT_LE(separator_value(v.row(i).transpose(), v.row(j).transpose(), 0.2), -0.05 + 1e-12);
      }
    }
  }
}

TEST(MaxFeasiblePacking, BisectionBracket) {
  const auto search = max_feasible_packing(3, 63, 11);
  ASSERT_TRUE(search.has_value());
  EXPECT_EQ(search->packing.size(), 63u);
  EXPECT_DOUBLE_EQ(search->margin, search->eps / 8.0);
  EXPECT_LE(max_offdiag_inner(search->packing.vectors), 1.0 - search->eps / 2.0 + 1e-12);
  // A visibly larger eps fails with the same seed.
  EXPECT_FALSE(greedy_packing(3, std::min(0.999, search->eps * 1.5), 63, 11).feasible());
}

TEST(BlockFeatures, Identities) {
  const int H = 4;
  const VectorSet jl = sample_jl_set(16, 0.8, 1);
  const FeatureMap f = FeatureMap::block(jl, H);
  EXPECT_EQ(f.dim(), 2 * jl.dim());
  for (StateId i = 0; i < 15; ++i) {
    for (Action a : kActions) EXPECT_NEAR(f(i, a).norm(), 1.0, 1e-12);
    for (StateId j = 0; j < 15; ++j) {
      EXPECT_EQ(f(i, Action::A1).dot(f(j, Action::A2)), 0.0);
      EXPECT_NEAR(f(i, Action::A1).dot(f(j, Action::A1)), jl.row(i).dot(jl.row(j)), 1e-15);
    }
  }
  const FeatureMap padded = FeatureMap::block(jl, H, 2 * jl.dim() + 6);
  EXPECT_EQ(padded.dim(), 2 * jl.dim() + 6);
  EXPECT_EQ(padded(3, Action::A2).tail(6).norm(), 0.0);
  EXPECT_THROW(FeatureMap::block(jl, 6), DimensionError);
  EXPECT_THROW(f(15, Action::A1), IndexError);
}

TEST(BlockFeatures, DotAndLevelMatrix) {
  const VectorSet jl = sample_jl_set(32, 0.8, 5);
  const FeatureMap f = FeatureMap::block(jl, 5);
  const Vector theta = Vector::LinSpaced(f.dim(), -1.0, 1.0);
  const RowMatrix level = f.level_matrix(2);
  ASSERT_EQ(level.rows(), 8);
  for (std::uint64_t k = 0; k < 4; ++k) {
    const StateId s = 3 + k;
    for (Action a : kActions) {
      EXPECT_EQ(level.row(static_cast<Eigen::Index>(2 * k + action_index(a))).transpose(), f(s, a));
      EXPECT_NEAR(f.dot(theta, s, a), theta.dot(f(s, a)), 1e-12);
    }
  }
  EXPECT_THROW(f.dot(Vector::Zero(3), 0, Action::A1), DimensionError);
}

TEST(SignFeatures, Values) {
  const FeatureMap f = FeatureMap::sign(5);
  EXPECT_EQ(f.dim(), 1);
  EXPECT_EQ(f(7, Action::A1)(0), 1.0);
  EXPECT_EQ(f(7, Action::A2)(0), -1.0);
  const TreeMDP mdp = make_value_lb(3, 2);
  const LinearCertificate cert = sign_certificate(mdp);
  EXPECT_EQ(cert.theta[0](0), -1.0);  // root plays A2 toward s_5
  EXPECT_EQ(cert.theta[1](0), 1.0);   // s_2 plays A1
}

TEST(PolicyLbFeatures, Properties) {
  const int H = 8;
  const auto search = max_feasible_packing(H / 2 - 1, 255, 3);
  ASSERT_TRUE(search);
  const FeatureMap f = FeatureMap::policy_lb(search->packing, H);
  EXPECT_EQ(f.dim(), H);
  for (StateId s = 0; s < 255; s += 17) {
    EXPECT_NEAR(f(s, Action::A1).norm(), 1.0, 1e-12);
    EXPECT_NEAR(f(s, Action::A2).norm(), 1.0, 1e-12);
    EXPECT_NEAR(f(s, Action::A1)(H - 1), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(f(s, Action::A1).dot(f(s + 1, Action::A2)), 0.0);
  }
  EXPECT_THROW(FeatureMap::policy_lb(search->packing, 7), ParityError);
  EXPECT_THROW(FeatureMap::policy_lb(search->packing, 10), DimensionError);
  const VectorSet jl = sample_jl_set(256, 0.9, 1);
  EXPECT_THROW(FeatureMap::policy_lb(jl, 8), InvalidArgument);
}

TEST(ThetaForQ, Examples) {
  const TreeMDP mdp = make_value_lb(3, 2);
  const FeatureMap f = FeatureMap::block(sample_jl_set(8, 0.9, 1), 3);
  const LinearCertificate opt = theta_for_q(mdp, f);
  EXPECT_EQ(opt.theta[1], f(2, Action::A1));
  EXPECT_EQ(opt.theta[0], f(0, Action::A2));
  const LinearCertificate a1 = theta_for_q(mdp, f, Policy::constant(3, Action::A1));
  EXPECT_EQ(a1.theta[1], f(2, Action::A1));
  EXPECT_EQ(a1.theta[0], f(0, Action::A2));  // s_0 -A2-> s_2 -A1-> s_5 still pays 1

  const TreeMDP zero = TreeMDP::zero(3);
  const LinearCertificate z = theta_for_q(zero, f, testing::random_policy(3, 1));
  for (const Vector& t : z.theta) EXPECT_EQ(t.norm(), 0.0);

  EXPECT_THROW(theta_for_q(make_policy_lb(4, 1), FeatureMap::block(sample_jl_set(16, 0.9, 1), 4)),
               VariantError);
  EXPECT_THROW(theta_for_q(mdp, FeatureMap::sign(4)), DimensionError);
}

TEST(ThetaForQ, MatchesBruteForceErrorForRandomPolicies) {
  const int H = 6;
  const TreeMDP mdp = make_value_lb(H, 19);
  const FeatureMap f = FeatureMap::block(sample_jl_set(64, 0.7, 9), H);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Policy pi = testing::random_policy(H, k);
    const LinearCertificate cert = theta_for_q(mdp, f, pi);
    EXPECT_LE(testing::brute_q_linear_error(mdp, f, cert, &pi), 0.7 + 1e-12);
  }
}

TEST(LinearMdpMaps, Examples) {
  const TreeMDP mdp = make_value_lb(3, 2);
  const FeatureMap f = FeatureMap::block(sample_jl_set(8, 0.9, 1), 3);
  const LinearCertificate c = linear_mdp_maps(mdp, f);
  ASSERT_TRUE(c.psi);
  EXPECT_EQ(c.psi->row(5).transpose(), f(2, Action::A1));
  EXPECT_EQ(c.psi->row(2).transpose(), f(0, Action::A2));
  EXPECT_EQ(c.beta[0].norm(), 0.0);
  EXPECT_EQ(c.beta[1], f(2, Action::A1));
  EXPECT_THROW(linear_mdp_maps(TreeMDP::zero(3), f), VariantError);
}

TEST(ThetaForPolicyLb, MarginsAndUnitNorm) {
  const int H = 8;
  const auto search = max_feasible_packing(H / 2 - 1, 255, 21);
  ASSERT_TRUE(search);
  const FeatureMap f = FeatureMap::policy_lb(search->packing, H);
  const TreeMDP mdp = make_policy_lb(H, 77);
  const LinearCertificate cert = theta_for_policy_lb(mdp, f);
  const ValueTables t = exact_optimal(mdp);
  const TreeShape& shape = mdp.shape();
  for (int h = 0; h < H - 1; ++h) {
    EXPECT_NEAR(cert.theta[static_cast<std::size_t>(h)].norm(), 1.0, 1e-12);
  }
  for (StateId s = 0; s < shape.num_internal(); ++s) {
    const Vector& th = cert.theta[static_cast<std::size_t>(shape.level_of(s))];
    const Action best = t.greedy(s);
    const double diff = f.dot(th, s, best) - f.dot(th, s, other(best));
    ASSERT_GE(diff, search->margin - 1e-12) << "state " << s;
  }
  EXPECT_EQ(greedy_linear_policy(f, cert, H), t.greedy_policy());
}

TEST(ThetaForPolicyLb, ArgmaxEqualsOptimalExhaustiveH12) {
  const int H = 12;
  const PackingResult packing = greedy_packing(H / 2 - 1, 0.02, 4095, 5);
  ASSERT_TRUE(packing.feasible());
  const FeatureMap f = FeatureMap::policy_lb(packing.set, H);
  for (std::uint64_t istar : {std::uint64_t{0}, std::uint64_t{1234}, std::uint64_t{2047}}) {
    const TreeMDP mdp = make_policy_lb(H, istar);
    EXPECT_EQ(greedy_linear_policy(f, theta_for_policy_lb(mdp, f), H),
              exact_optimal(mdp).greedy_policy());
  }
}

}  // namespace
}  // namespace linlb
