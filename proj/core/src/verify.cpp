#include "linlb/verify.hpp"

#include <cmath>
#include <limits>

#include "linlb/errors.hpp"
#include "linlb/rng.hpp"

namespace linlb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_levels(const TreeMDP& mdp, const FeatureMap& fmap, const LinearCertificate& cert) {
  if (fmap.horizon() != mdp.horizon()) throw DimensionError("feature map horizon mismatch");
  if (cert.theta.size() + 1 < static_cast<std::size_t>(mdp.horizon())) {
    throw DimensionError("certificate needs one theta per decision level");
  }
  for (std::size_t h = 0; h + 1 < static_cast<std::size_t>(mdp.horizon()); ++h) {
    if (cert.theta[h].size() != fmap.dim()) {
      throw DimensionError("theta_" + std::to_string(h) + " has dimension " +
                           std::to_string(cert.theta[h].size()) + ", features have " +
                           std::to_string(fmap.dim()));
    }
  }
}

VerificationReport finish(VerificationReport r) {
  r.pass = r.worst_violation <= r.threshold + r.tolerance;
  return r;
}

VerificationReport scan_q(const TreeMDP& mdp, const FeatureMap& fmap,
                          const LinearCertificate& cert, const ValueTables& tables, double delta,
                          std::string name) {
  require_levels(mdp, fmap, cert);
  const TreeShape& shape = mdp.shape();

  std::optional<std::vector<std::optional<std::pair<StateId, Action>>>> path;
  try {
    path = on_path_pairs(mdp);
  } catch (const VariantError&) {
  }
  std::optional<CaseBreakdown> cases;
  if (path) cases.emplace();

  VerificationReport r;
  r.assumption = std::move(name);
  r.threshold = delta;
  r.worst_violation = 0.0;
  for (StateId s = 0; s < shape.num_internal(); ++s) {
    const int h = shape.level_of(s);
    const Vector& theta = cert.theta[static_cast<std::size_t>(h)];
    for (Action a : kActions) {
      const double err = std::abs(tables.Q(s, a) - fmap.dot(theta, s, a));
      if (!r.witness || err > r.worst_violation) {
        r.worst_violation = err;
        r.witness = Witness{s, a, h, std::nullopt};
      }
      if (cases) {
        const auto& on = (*path)[static_cast<std::size_t>(h)];
        if (!on) continue;
        double& slot = a != on->second      ? cases->off_action
                       : s != on->first     ? cases->on_action_other
                                            : cases->on_path;
        slot = std::max(slot, err);
      }
    }
  }
  if (cases && path) {
    for (int h = 0; h + 1 < mdp.horizon(); ++h) {
      if (!(*path)[static_cast<std::size_t>(h)]) ++cases->levels_without_path;
    }
  }
  r.cases = cases;
  return finish(std::move(r));
}

}  // namespace

VerificationReport check_q_linear(const TreeMDP& mdp, const FeatureMap& fmap,
                                  const LinearCertificate& cert, double delta) {
  return scan_q(mdp, fmap, cert, exact_optimal(mdp), delta, "q-star-linear");
}

VerificationReport check_q_linear(const TreeMDP& mdp, const FeatureMap& fmap,
                                  const LinearCertificate& cert, const Policy& pi, double delta) {
  return scan_q(mdp, fmap, cert, exact_policy_values(mdp, pi), delta, "q-pi-linear");
}

VerificationReport check_policy_completeness(const TreeMDP& mdp, const FeatureMap& fmap,
                                             double delta, int k, std::uint64_t seed) {
  if (k < 0) throw InvalidArgument("policy sample count must be non-negative");
  std::vector<std::pair<std::string, Policy>> policies;
  policies.emplace_back("optimal", exact_optimal(mdp).greedy_policy());
  policies.emplace_back("constant-A1", Policy::constant(mdp.horizon(), Action::A1));
  policies.emplace_back("constant-A2", Policy::constant(mdp.horizon(), Action::A2));
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < k; ++i) {
    Policy pi(mdp.horizon());
    for (StateId s = 0; s < mdp.shape().num_internal(); ++s) {
      pi.set(s, coin(rng) ? Action::A2 : Action::A1);
    }
    policies.emplace_back("random-" + std::to_string(i), std::move(pi));
  }

  VerificationReport worst;
  bool first = true;
  for (const auto& [name, pi] : policies) {
    const LinearCertificate cert = theta_for_q(mdp, fmap, pi);
    VerificationReport r = check_q_linear(mdp, fmap, cert, pi, delta);
    if (first || r.worst_violation > worst.worst_violation) {
      worst = std::move(r);
      worst.detail = "worst policy: " + name;
      first = false;
    }
  }
  worst.assumption = "policy-completeness";
  worst.detail += "; policies checked: " + std::to_string(policies.size());
  return finish(std::move(worst));
}

VerificationReport check_linear_mdp(const TreeMDP& mdp, const FeatureMap& fmap,
                                    const LinearCertificate& cert, double delta) {
  if (mdp.horizon() > kLinearMdpLimit) {
    throw CapacityError("linear-MDP scan limited to H <= " + std::to_string(kLinearMdpLimit));
  }
  if (fmap.horizon() != mdp.horizon()) throw DimensionError("feature map horizon mismatch");
  const TreeShape& shape = mdp.shape();
  if (!cert.psi || cert.psi->rows() != static_cast<Eigen::Index>(shape.num_states()) ||
      cert.psi->cols() != fmap.dim()) {
    throw DimensionError("psi must have one row of feature dimension per state");
  }
  if (cert.beta.size() + 1 < static_cast<std::size_t>(mdp.horizon())) {
    throw DimensionError("certificate needs one beta per decision level");
  }

  VerificationReport r;
  r.assumption = "linear-mdp";
  r.threshold = delta;
  for (int h = 0; h + 1 < mdp.horizon(); ++h) {
    const RowMatrix phi = fmap.level_matrix(h);
    const StateId next_first = shape.first_of_level(h + 1);
    const auto next_count = static_cast<Eigen::Index>(shape.level_size(h + 1));
    const Eigen::MatrixXd pred = phi * cert.psi->middleRows(next_first, next_count).transpose();
    const Vector& beta = cert.beta[static_cast<std::size_t>(h)];
    if (beta.size() != fmap.dim()) throw DimensionError("beta dimension mismatch");
    const Vector reward_pred = phi * beta;
    const StateId first = shape.first_of_level(h);
    for (Eigen::Index row = 0; row < phi.rows(); ++row) {
      const StateId s = first + static_cast<StateId>(row / 2);
      const Action a = row % 2 == 0 ? Action::A1 : Action::A2;
      const StateId target = shape.child(s, a);
      for (Eigen::Index col = 0; col < next_count; ++col) {
        const StateId sp = next_first + static_cast<StateId>(col);
        const double p = sp == target ? 1.0 : 0.0;
        const double err = std::abs(p - pred(row, col));
        if (!r.witness || err > r.worst_violation) {
          r.worst_violation = err;
          r.witness = Witness{s, a, h, sp};
        }
      }
      const double rerr = std::abs(mdp.reward(s, a) - reward_pred(row));
      if (rerr > r.worst_violation) {
        r.worst_violation = rerr;
        r.witness = Witness{s, a, h, std::nullopt};
      }
    }
  }
  return finish(std::move(r));
}

VerificationReport check_policy_realizable(const TreeMDP& mdp, const FeatureMap& fmap,
                                           const LinearCertificate& cert) {
  require_levels(mdp, fmap, cert);
  const ValueTables t = exact_optimal(mdp);
  const TreeShape& shape = mdp.shape();
  VerificationReport r;
  r.assumption = "policy-realizable";
  r.threshold = 0.0;
  r.worst_violation = -kInf;
  for (StateId s = 0; s < shape.num_internal(); ++s) {
    const int h = shape.level_of(s);
    const Vector& theta = cert.theta[static_cast<std::size_t>(h)];
    const double best_q = std::max(t.Q(s, Action::A1), t.Q(s, Action::A2));
    double best_score = -kInf;
    double best_optimal_score = -kInf;
    for (Action a : kActions) {
      const double score = fmap.dot(theta, s, a);
      best_score = std::max(best_score, score);
      if (t.Q(s, a) >= best_q - kTieTolerance) best_optimal_score = std::max(best_optimal_score, score);
    }
    const double shortfall = best_score - best_optimal_score;
    if (shortfall > r.worst_violation) {
      r.worst_violation = shortfall;
      r.witness = Witness{s, t.greedy(s), h, std::nullopt};
    }
  }
  if (shape.num_internal() == 0) r.worst_violation = 0.0;
  return finish(std::move(r));
}

VerificationReport check_margin(const TreeMDP& mdp, const FeatureMap& fmap,
                                const LinearCertificate& cert, double margin) {
  require_levels(mdp, fmap, cert);
  const TreeShape& shape = mdp.shape();
  for (int h = 0; h + 1 < mdp.horizon(); ++h) {
    const double n = cert.theta[static_cast<std::size_t>(h)].norm();
    if (std::abs(n - 1.0) > kVerifyTolerance) {
      throw NormalizationError("theta_" + std::to_string(h) + " has norm " + std::to_string(n));
    }
  }
  for (StateId s = 0; s < shape.num_internal(); ++s) {
    for (Action a : kActions) {
      const double n = fmap(s, a).norm();
      if (std::abs(n - 1.0) > kVerifyTolerance) {
        throw NormalizationError("phi(" + std::to_string(s) + ", " + std::string(to_string(a)) +
                                 ") has norm " + std::to_string(n));
      }
    }
  }

  const ValueTables t = exact_optimal(mdp);
  VerificationReport r;
  r.assumption = "margin";
  r.threshold = 0.0;
  r.worst_violation = -kInf;
  double min_margin = kInf;
  for (StateId s = 0; s < shape.num_internal(); ++s) {
    const int h = shape.level_of(s);
    const Action best = t.greedy(s);
    if (std::abs(t.Q(s, Action::A1) - t.Q(s, Action::A2)) <= kTieTolerance) {
      r.worst_violation = kInf;
      r.witness = Witness{s, best, h, std::nullopt};
      r.detail = "optimal action is not unique";
      break;
    }
    const Vector& theta = cert.theta[static_cast<std::size_t>(h)];
    const double m = fmap.dot(theta, s, best) - fmap.dot(theta, s, other(best));
    if (m < min_margin) {
      min_margin = m;
      r.worst_violation = margin - m;
      r.witness = Witness{s, best, h, std::nullopt};
    }
  }
  if (r.detail.empty() && std::isfinite(min_margin)) {
    r.detail = "min score margin " + std::to_string(min_margin);
  }
  if (shape.num_internal() == 0) r.worst_violation = 0.0;
  return finish(std::move(r));
}

VerificationReport check_gap(const TreeMDP& mdp, double gamma) {
  const ValueTables t = exact_optimal(mdp);
  const TreeShape& shape = mdp.shape();
  VerificationReport r;
  r.assumption = "gap";
  r.threshold = 0.0;
  double min_gap = kInf;
  for (StateId s = 0; s < shape.num_internal(); ++s) {
    const double gap = std::abs(t.Q(s, Action::A1) - t.Q(s, Action::A2));
    if (gap > kTieTolerance && gap < min_gap) {
      min_gap = gap;
      r.witness = Witness{s, other(t.greedy(s)), shape.level_of(s), std::nullopt};
    }
  }
  r.worst_violation = gamma - min_gap;
  r.detail = std::isfinite(min_gap) ? "min positive gap " + std::to_string(min_gap)
                                    : "no positive gap";
  return finish(std::move(r));
}

}  // namespace linlb
