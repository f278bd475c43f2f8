#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "linlb/features.hpp"
#include "linlb/oracle.hpp"

namespace linlb {

/// C-approximate barycentric spanner of a finite vector list, restricted to
/// the list's span (rank r <= d).
struct Spanner {
  std::vector<std::size_t> indices;  // rows of the input list
  Eigen::MatrixXd basis;             // d x r, columns are the chosen vectors
  double C = 2.0;

  int rank() const { return static_cast<int>(indices.size()); }

  // Orthonormal basis of the span and the LU of the spanner in those
  // coordinates; used by spanner_coefficients.
  Eigen::MatrixXd span_basis;
  Eigen::PartialPivLU<Eigen::MatrixXd> coords_lu;
};

inline constexpr double kSpanResidualTolerance = 1e-8;

/// Greedy maximum-volume basis followed by determinant swaps until every
/// input has coefficients bounded by C.
Spanner barycentric_spanner(const RowMatrix& vectors, double C = 2.0);

/// Spanner built from the given rows of `vectors` without any swapping.
Spanner spanner_from_indices(const RowMatrix& vectors, std::vector<std::size_t> indices,
                             double C = 2.0);

/// c with v = sum_i c_i basis_i; throws SpanError when v leaves the span.
Vector spanner_coefficients(const Eigen::Ref<const Vector>& v, const Spanner& sp);

/// Coefficients for every row of `vectors` at once (r x n).
Eigen::MatrixXd spanner_coefficients_all(const RowMatrix& vectors, const Spanner& sp);

// ---------------------------------------------------------------------------
// Generative-model learners

struct GmParams {
  double fail_prob = 0.01;
  double C = 2.0;
};

/// ceil(ln(2 H d / fail_prob) / (2 alpha^2)).
std::uint64_t hoeffding_rollouts(double alpha, int horizon, int dim, double fail_prob);

/// Per-point accuracy for a level spanned by `rank` points.
double gap_accuracy(double gamma, int rank, double C);
double eps_accuracy(double eps, int horizon, int rank, double C);

/// Exact trajectory count either learner spends on `fmap` (sum over levels
/// of spanner size times rollouts per point).
std::uint64_t gm_planned_trajectories(const FeatureMap& fmap, bool gap_learner, double target,
                                      const GmParams& params, bool deterministic);

/// H * d * ceil(ln(2Hd/fail_prob) / (2 alpha_d^2)), alpha_d using the full dimension.
std::uint64_t gm_trajectory_ceiling(const FeatureMap& fmap, bool gap_learner, double target,
                                    const GmParams& params);

LearnerOutcome gm_gap_learner(OracleSession& session, const FeatureMap& fmap, double gamma,
                              const GmParams& params = {});
LearnerOutcome gm_eps_learner(OracleSession& session, const FeatureMap& fmap, double eps,
                              const GmParams& params = {});

// ---------------------------------------------------------------------------
// Baselines

/// Uniformly random episodes; routes to the best leaf seen. Stops early once
/// a return of 1 is observed.
LearnerOutcome baseline_uniform(OracleSession& session, std::uint64_t budget,
                                std::uint64_t seed);

/// Backward least-squares value iteration from `samples_per_level` uniform
/// (s, a) probes per level. Generative and known-transition modes.
LearnerOutcome baseline_lsvi(OracleSession& session, const FeatureMap& fmap,
                             std::uint64_t samples_per_level, double regularizer,
                             std::uint64_t seed);

/// Anytime least-squares value iteration over uniformly random episodes, for
/// the trajectories-to-success sweeps. Refits whenever a new rewarding pair
/// is seen and at doubling checkpoints, then plays one greedy episode; stops
/// when that episode returns 1.
LearnerOutcome lsvi_episodic(OracleSession& session, const FeatureMap& fmap,
                             double regularizer, std::uint64_t budget, std::uint64_t seed);

}  // namespace linlb
