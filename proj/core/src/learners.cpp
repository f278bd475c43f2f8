#include "linlb/learners.hpp"

#include <cmath>
#include <limits>

#include "linlb/errors.hpp"

namespace linlb {
namespace {

constexpr double kFullReturn = 1.0 - 1e-12;

void validate_gm(const OracleSession& session, const FeatureMap& fmap, double target,
                 const GmParams& params) {
  if (session.mode() == QueryMode::rl) {
    throw ModeError("rollout learners need a generative or known-transition session");
  }
  if (fmap.horizon() != session.horizon()) throw DimensionError("feature map horizon mismatch");
  if (!(target > 0.0)) throw InvalidArgument("accuracy target must be positive");
  if (!(params.fail_prob > 0.0 && params.fail_prob < 1.0)) {
    throw InvalidArgument("fail_prob must lie in (0, 1)");
  }
  if (!(params.C >= 1.0 + 1e-6)) throw InvalidArgument("spanner factor C must be at least 1 + 1e-6");
}

double level_accuracy(bool gap_learner, double target, int horizon, int rank, double C) {
  return gap_learner ? gap_accuracy(target, rank, C) : eps_accuracy(target, horizon, rank, C);
}

LearnerOutcome gm_learner(OracleSession& session, const FeatureMap& fmap, bool gap_learner,
                          double target, const GmParams& params) {
  validate_gm(session, fmap, target, params);
  const int H = session.horizon();
  const TreeShape& shape = session.shape();
  Policy pi(H);
  if (!gap_learner && target >= 1.0) return {pi, true};

  const bool deterministic = session.declared_noise_free();
  try {
    for (int h = H - 2; h >= 0; --h) {
      const RowMatrix phi = fmap.level_matrix(h);
      const Spanner sp = barycentric_spanner(phi, params.C);
      if (sp.rank() == 0) continue;
      const std::uint64_t n =
          deterministic ? 1
                        : hoeffding_rollouts(level_accuracy(gap_learner, target, H, sp.rank(), params.C),
                                             H, fmap.dim(), params.fail_prob);
      const StateId first = shape.first_of_level(h);
      Eigen::VectorXd est(sp.rank());
      for (int i = 0; i < sp.rank(); ++i) {
        const std::size_t row = sp.indices[static_cast<std::size_t>(i)];
        const Action a = row % 2 == 0 ? Action::A1 : Action::A2;
        est(i) = session.gm_rollout_mean(first + row / 2, a, pi, n);
      }
      const Eigen::VectorXd qhat = spanner_coefficients_all(phi, sp).transpose() * est;
      for (std::uint64_t k = 0; k < shape.level_size(h); ++k) {
        pi.set(first + k, qhat(2 * k + 1) > qhat(2 * k) ? Action::A2 : Action::A1);
      }
    }
  } catch (const BudgetExhausted&) {
    return {pi, false};
  }
  return {pi, true};
}

std::uint64_t random_actions(Rng& rng, int horizon, std::vector<Action>& out) {
  out.resize(static_cast<std::size_t>(horizon - 1));
  const std::uint64_t bits = rng();
  for (int i = 0; i < horizon - 1; ++i) {
    out[static_cast<std::size_t>(i)] = ((bits >> i) & 1U) != 0 ? Action::A2 : Action::A1;
  }
  return bits;
}

// Ridge-regressed Q weights per level from per-pair reward statistics.
// `count` and `rsum` are indexed 2 * state + action over internal states.
std::vector<Vector> fit_lsvi(const FeatureMap& fmap, const std::vector<std::uint32_t>& count,
                             const std::vector<double>& rsum, double regularizer) {
  const TreeShape shape(fmap.horizon());
  const int H = shape.horizon();
  const Eigen::Index d = fmap.dim();
  std::vector<Vector> w(static_cast<std::size_t>(H - 1), Vector::Zero(d));
  for (int h = H - 2; h >= 0; --h) {
    const StateId first = shape.first_of_level(h);
    const std::uint64_t n_pairs = 2 * shape.level_size(h);
    Eigen::Index rows = 0;
    for (std::uint64_t k = 0; k < n_pairs; ++k) rows += count[2 * first + k] > 0 ? 1 : 0;
    if (rows == 0) continue;

    Eigen::MatrixXd X(rows, d);
    Eigen::VectorXd y(rows);
    Eigen::Index r = 0;
    for (std::uint64_t k = 0; k < n_pairs; ++k) {
      const std::uint64_t idx = 2 * first + k;
      if (count[idx] == 0) continue;
      const StateId s = first + k / 2;
      const Action a = k % 2 == 0 ? Action::A1 : Action::A2;
      double next = 0.0;
      if (h + 1 <= H - 2) {
        const StateId c = shape.child(s, a);
        const auto& wn = w[static_cast<std::size_t>(h + 1)];
        next = std::max(fmap.dot(wn, c, Action::A1), fmap.dot(wn, c, Action::A2));
      }
      const double c = count[idx];
      const double sc = std::sqrt(c);
      X.row(r) = sc * fmap(s, a).transpose();
      y(r) = sc * (rsum[idx] / c + next);
      ++r;
    }
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(d, d) * regularizer;
    G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    w[static_cast<std::size_t>(h)] = G.selfadjointView<Eigen::Lower>().ldlt().solve(X.transpose() * y);
  }
  return w;
}

Policy greedy_from_weights(const FeatureMap& fmap, const std::vector<Vector>& w) {
  const TreeShape shape(fmap.horizon());
  Policy pi(shape.horizon());
  for (int h = 0; h + 1 < shape.horizon(); ++h) {
    const auto& wh = w[static_cast<std::size_t>(h)];
    if (wh.isZero(0.0)) continue;
    const StateId first = shape.first_of_level(h);
    for (std::uint64_t k = 0; k < shape.level_size(h); ++k) {
      const StateId s = first + k;
      if (fmap.dot(wh, s, Action::A2) > fmap.dot(wh, s, Action::A1) + kTieTolerance) {
        pi.set(s, Action::A2);
      }
    }
  }
  return pi;
}

void check_regularizer(double regularizer) {
  if (!(regularizer > 0.0)) throw InvalidArgument("regularizer must be positive");
}

}  // namespace

std::uint64_t hoeffding_rollouts(double alpha, int horizon, int dim, double fail_prob) {
  if (!(alpha > 0.0)) throw InvalidArgument("accuracy must be positive");
  if (!(fail_prob > 0.0 && fail_prob < 1.0)) throw InvalidArgument("fail_prob must lie in (0, 1)");
  const double n = std::ceil(std::log(2.0 * horizon * dim / fail_prob) / (2.0 * alpha * alpha));
  if (!(n < 9.0e18)) throw CapacityError("rollout count overflows");
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

double gap_accuracy(double gamma, int rank, double C) { return gamma / (4.0 * rank * C); }

double eps_accuracy(double eps, int horizon, int rank, double C) {
  return eps / (2.0 * horizon * rank * C);
}

std::uint64_t gm_planned_trajectories(const FeatureMap& fmap, bool gap_learner, double target,
                                      const GmParams& params, bool deterministic) {
  const int H = fmap.horizon();
  if (!gap_learner && target >= 1.0) return 0;
  std::uint64_t total = 0;
  for (int h = H - 2; h >= 0; --h) {
    const int r = barycentric_spanner(fmap.level_matrix(h), params.C).rank();
    if (r == 0) continue;
    const std::uint64_t n =
        deterministic ? 1
                      : hoeffding_rollouts(level_accuracy(gap_learner, target, H, r, params.C), H,
                                           fmap.dim(), params.fail_prob);
    total += static_cast<std::uint64_t>(r) * n;
  }
  return total;
}

std::uint64_t gm_trajectory_ceiling(const FeatureMap& fmap, bool gap_learner, double target,
                                    const GmParams& params) {
  const int H = fmap.horizon();
  const int d = fmap.dim();
  const double alpha = level_accuracy(gap_learner, target, H, d, params.C);
  return static_cast<std::uint64_t>(H) * static_cast<std::uint64_t>(d) *
         hoeffding_rollouts(alpha, H, d, params.fail_prob);
}

LearnerOutcome gm_gap_learner(OracleSession& session, const FeatureMap& fmap, double gamma,
                              const GmParams& params) {
  return gm_learner(session, fmap, true, gamma, params);
}

LearnerOutcome gm_eps_learner(OracleSession& session, const FeatureMap& fmap, double eps,
                              const GmParams& params) {
  return gm_learner(session, fmap, false, eps, params);
}

LearnerOutcome baseline_uniform(OracleSession& session, std::uint64_t budget,
                                std::uint64_t seed) {
  const TreeShape& shape = session.shape();
  Rng rng = make_rng(seed, 0x0b1);
  std::vector<Action> actions;
  double best = -1.0;
  StateId best_leaf = 0;
  bool complete = true;
  try {
    for (std::uint64_t t = 0; t < budget; ++t) {
      random_actions(rng, shape.horizon(), actions);
      const Trajectory traj = session.rl_episode(actions);
      double ret = 0.0;
      StateId s = 0;
      for (const Step& step : traj) {
        ret += step.reward;
        s = shape.child(step.state, step.action);
      }
      if (ret > best) {
        best = ret;
        best_leaf = s;
      }
      if (ret >= kFullReturn) break;
    }
  } catch (const BudgetExhausted&) {
    complete = false;
  }
  if (best < 0.0) return {Policy(shape.horizon()), complete};
  return {Policy::route_to(shape, best_leaf), complete};
}

LearnerOutcome baseline_lsvi(OracleSession& session, const FeatureMap& fmap,
                             std::uint64_t samples_per_level, double regularizer,
                             std::uint64_t seed) {
  if (session.mode() == QueryMode::rl) {
    throw ModeError("batch LSVI needs a generative or known-transition session");
  }
  if (fmap.horizon() != session.horizon()) throw DimensionError("feature map horizon mismatch");
  check_regularizer(regularizer);
  const TreeShape& shape = session.shape();
  const int H = shape.horizon();
  Rng rng = make_rng(seed, 0x15f);
  std::vector<std::uint32_t> count(2 * shape.num_internal(), 0);
  std::vector<double> rsum(2 * shape.num_internal(), 0.0);
  bool complete = true;
  try {
    for (int h = H - 2; h >= 0; --h) {
      std::uniform_int_distribution<std::uint64_t> pick(0, 2 * shape.level_size(h) - 1);
      const StateId first = shape.first_of_level(h);
      for (std::uint64_t m = 0; m < samples_per_level; ++m) {
        const std::uint64_t k = pick(rng);
        const StateId s = first + k / 2;
        const Action a = k % 2 == 0 ? Action::A1 : Action::A2;
        const auto probe = session.gm_probe(s, a);
        count[2 * s + action_index(a)] += 1;
        rsum[2 * s + action_index(a)] += probe.reward;
      }
    }
  } catch (const BudgetExhausted&) {
    complete = false;
  }
  return {greedy_from_weights(fmap, fit_lsvi(fmap, count, rsum, regularizer)), complete};
}

LearnerOutcome lsvi_episodic(OracleSession& session, const FeatureMap& fmap, double regularizer,
                             std::uint64_t budget, std::uint64_t seed) {
  if (fmap.horizon() != session.horizon()) throw DimensionError("feature map horizon mismatch");
  check_regularizer(regularizer);
  const TreeShape& shape = session.shape();
  const int H = shape.horizon();
  Rng rng = make_rng(seed, 0x15e);
  std::vector<std::uint32_t> count(2 * shape.num_internal(), 0);
  std::vector<double> rsum(2 * shape.num_internal(), 0.0);
  std::vector<bool> rewarding(2 * shape.num_internal(), false);
  std::vector<Action> actions;
  Policy pi(H);
  bool any_reward = false;
  std::uint64_t checkpoint = 64;

  auto record = [&](const Trajectory& traj) {
    bool fresh = false;
    double ret = 0.0;
    for (const Step& step : traj) {
      const std::uint64_t idx = 2 * step.state + action_index(step.action);
      count[idx] += 1;
      rsum[idx] += step.reward;
      ret += step.reward;
      if (step.reward > 0.0 && !rewarding[idx]) {
        rewarding[idx] = true;
        fresh = true;
      }
    }
    any_reward = any_reward || fresh;
    return std::pair{fresh, ret};
  };

  try {
    for (std::uint64_t t = 1; session.trajectories_used() < budget; ++t) {
      random_actions(rng, H, actions);
      const auto [fresh, ret] = record(session.rl_episode(actions));
      (void)ret;
      const bool due = t >= checkpoint;
      if (due) checkpoint *= 2;
      if (!(fresh || (due && any_reward))) continue;
      if (session.trajectories_used() >= budget) break;
      pi = greedy_from_weights(fmap, fit_lsvi(fmap, count, rsum, regularizer));
      const auto [fresh_eval, eval_ret] = record(session.rl_episode(pi));
      (void)fresh_eval;
      if (eval_ret >= kFullReturn) return {pi, true};
    }
  } catch (const BudgetExhausted&) {
    return {pi, false};
  }
  return {pi, false};
}

}  // namespace linlb
