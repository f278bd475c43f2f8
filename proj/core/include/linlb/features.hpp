#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "linlb/tree_mdp.hpp"

namespace linlb {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class VectorKind { jl, packing, packing_lifted };

std::string_view to_string(VectorKind k);
VectorKind parse_vector_kind(std::string_view text);

/// Ordered family of equal-dimension vectors, one per row.
struct VectorSet {
  VectorKind kind = VectorKind::jl;
  double eps = 0.0;
  RowMatrix vectors;

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
  auto row(std::size_t i) const { return vectors.row(static_cast<Eigen::Index>(i)); }
};

/// ceil(8 ln n / eps^2).
int jl_dimension(std::uint64_t n, double eps);

/// Largest |<v_i, v_j>| over i != j, computed in row blocks.
double max_abs_offdiag_inner(const RowMatrix& vectors);
/// Largest <v_i, v_j> over i != j (signed).
double max_offdiag_inner(const RowMatrix& vectors);

/// n Gaussian-then-normalized vectors in dimension jl_dimension(n, eps),
/// resampled as a whole until every pairwise |inner product| <= eps.
/// Throws ConstructionFailed after `max_rounds` failed attempts.
VectorSet sample_jl_set(std::uint64_t n, double eps, std::uint64_t seed, int max_rounds = 10);

/// Result of a greedy packing run. `feasible()` is false when fewer than
/// `target` points were placed; the partial packing is kept for inspection.
struct PackingResult {
  VectorSet set;
  std::size_t target = 0;
  std::uint64_t samples_drawn = 0;

  bool feasible() const { return set.size() >= target; }
};

/// Random-sequential packing on the unit sphere S^{dim-1}: accept a random
/// unit vector iff its inner product with every accepted point is at most
/// 1 - eps/2 (distance >= sqrt(eps)). Stops at `target_n` points or after
/// `max_attempts` consecutive rejections.
PackingResult greedy_packing(int dim, double eps, std::size_t target_n, std::uint64_t seed,
                             std::uint64_t max_attempts = 20000);

struct MarginSearch {
  double eps = 0.0;
  /// eps / 8: the margin the separator construction guarantees.
  double margin = 0.0;
  VectorSet packing;
};

/// Bisection over eps for the largest value at which greedy_packing still
/// reaches `target_n` points with the given seed.
std::optional<MarginSearch> max_feasible_packing(int dim, std::size_t target_n,
                                                 std::uint64_t seed,
                                                 std::uint64_t max_attempts = 20000,
                                                 int iterations = 24);

/// Closed-form separator for packing point p: f_p(q) = <q, p> - (1 - eps/4).
/// f_p(p) = eps/4 and f_p(q) <= -eps/4 for every other packing point q.
double separator_value(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q,
                       double eps);

enum class FeatureKind { block, sign, policy_lb, onehot };

std::string_view to_string(FeatureKind k);

/// Maps (state, action) to R^d. Immutable; copies share the backing set.
class FeatureMap {
 public:
  /// phi(s_i, A1) = [p_i; 0], phi(s_i, A2) = [0; p_i], zero-padded to
  /// `padded_dim` when that exceeds 2m.
  static FeatureMap block(const VectorSet& jl, int horizon, int padded_dim = 0);
  /// phi(s, A1) = +1, phi(s, A2) = -1.
  static FeatureMap sign(int horizon);
  /// Lifted packing features, normalized to unit norm:
  /// phi(s_i, A1) = [0; p_i; 1] / sqrt 2, phi(s_i, A2) = [p_i; 1; 0] / sqrt 2.
  static FeatureMap policy_lb(const VectorSet& packing, int horizon);
  /// Standard basis vector e_{2s+a}; dimension 2(2^H - 1).
  static FeatureMap onehot(int horizon);

  FeatureKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int horizon() const { return horizon_; }
  const VectorSet* backing() const { return backing_.get(); }
  int padded_dim() const { return padded_dim_; }

  Vector operator()(StateId s, Action a) const;
  /// <theta, phi(s, a)> without materializing phi.
  double dot(const Eigen::Ref<const Vector>& theta, StateId s, Action a) const;

  /// Rows phi(s, a) for the level's states in id order, A1 before A2.
  RowMatrix level_matrix(int level) const;

 private:
  FeatureMap(FeatureKind kind, int dim, int horizon, std::shared_ptr<const VectorSet> backing,
             int padded_dim = 0);
  void check_state(StateId s) const;

  FeatureKind kind_;
  int dim_;
  int horizon_;
  std::shared_ptr<const VectorSet> backing_;
  int padded_dim_ = 0;
};

/// Maximum dimension accepted for one-hot maps.
inline constexpr int kMaxOnehotDim = 1 << 16;

/// Per-level coefficient vectors, plus the optional linear-MDP pieces.
struct LinearCertificate {
  std::vector<Vector> theta;              // one per level 0..H-1
  std::optional<RowMatrix> psi;           // row s' = psi(s')
  std::vector<Vector> beta;               // empty unless a linear-MDP certificate
};

/// argmax_a <theta_h, phi(s, a)> per internal state, ties to A1.
Policy greedy_linear_policy(const FeatureMap& fmap, const LinearCertificate& cert, int horizon);

/// The unique pair per level with positive optimal value, if any.
/// Throws VariantError when some level has more than one such pair.
std::vector<std::optional<std::pair<StateId, Action>>> on_path_pairs(const TreeMDP& mdp);

/// theta_h = Q^pi(s_h, a_h) phi(s_h, a_h) for the level's on-path pair
/// (theta_h = 0 on levels without one).
LinearCertificate theta_for_q(const TreeMDP& mdp, const FeatureMap& fmap);
LinearCertificate theta_for_q(const TreeMDP& mdp, const FeatureMap& fmap, const Policy& pi);

/// psi(s') = phi(parent(s')), beta = phi at the single rewarding pair's level.
LinearCertificate linear_mdp_maps(const TreeMDP& mdp, const FeatureMap& fmap);

/// theta_h = +1 when the level's on-path action is A1, -1 otherwise. Pairs
/// with FeatureMap::sign.
LinearCertificate sign_certificate(const TreeMDP& mdp);

/// Unit-norm margin certificate for the policy family: A1 levels use the
/// lifted-coordinate difference, the single A2 level uses the separator of the
/// A2 state's packing point.
LinearCertificate theta_for_policy_lb(const TreeMDP& mdp, const FeatureMap& fmap);

}  // namespace linlb
