#include <cmath>

#include "linlb/errors.hpp"
#include "linlb/features.hpp"

namespace linlb {

namespace {

// Q* = 1 is the largest value any pair can have (returns lie in [0, 1]).
constexpr double kOnPathTolerance = 1e-12;

void require_matching(const TreeMDP& mdp, const FeatureMap& fmap) {
  if (fmap.horizon() != mdp.horizon()) {
    throw DimensionError("feature map horizon " + std::to_string(fmap.horizon()) +
                         " does not match instance horizon " + std::to_string(mdp.horizon()));
  }
}

Vector lifted_a1_certificate(int horizon) {
  // phi(s, A1) carries its lifted coordinate 1/sqrt2 at index H-1 and
  // phi(s, A2) at index H/2 - 1, so this theta scores A1 at 1/2 and A2 at -1/2.
  Vector theta = Vector::Zero(horizon);
  theta(horizon - 1) = 1.0 / std::sqrt(2.0);
  theta(horizon / 2 - 1) = -1.0 / std::sqrt(2.0);
  return theta;
}

LinearCertificate theta_from_tables(const TreeMDP& mdp, const FeatureMap& fmap,
                                    const ValueTables& tables) {
  require_matching(mdp, fmap);
  const ValueTables optimal = exact_optimal(mdp);
  for (double q : optimal.q) {
    if (q > kOnPathTolerance && q < 1.0 - kOnPathTolerance) {
      throw VariantError("on-path certificate needs Q* values in {0, 1}");
    }
  }
  const auto pairs = on_path_pairs(mdp);
  LinearCertificate cert;
  cert.theta.assign(static_cast<std::size_t>(mdp.horizon()), Vector::Zero(fmap.dim()));
  for (int h = 0; h < mdp.horizon(); ++h) {
    const auto& pair = pairs[static_cast<std::size_t>(h)];
    if (!pair) continue;
    const auto [s, a] = *pair;
    cert.theta[static_cast<std::size_t>(h)] = tables.Q(s, a) * fmap(s, a);
  }
  return cert;
}

}  // namespace

Policy greedy_linear_policy(const FeatureMap& fmap, const LinearCertificate& cert, int horizon) {
  const TreeShape shape(horizon);
  if (cert.theta.size() < static_cast<std::size_t>(horizon - 1)) {
    throw DimensionError("certificate has fewer levels than the horizon needs");
  }
  Policy pi(horizon);
  for (StateId s = 0; s < shape.num_internal(); ++s) {
    const Vector& theta = cert.theta[static_cast<std::size_t>(shape.level_of(s))];
    if (fmap.dot(theta, s, Action::A2) > fmap.dot(theta, s, Action::A1)) pi.set(s, Action::A2);
  }
  return pi;
}

std::vector<std::optional<std::pair<StateId, Action>>> on_path_pairs(const TreeMDP& mdp) {
  const ValueTables t = exact_optimal(mdp);
  const TreeShape& shape = mdp.shape();
  std::vector<std::optional<std::pair<StateId, Action>>> out(
      static_cast<std::size_t>(mdp.horizon()));
  for (int h = 0; h + 1 < mdp.horizon(); ++h) {
    auto& slot = out[static_cast<std::size_t>(h)];
    for (StateId s = shape.first_of_level(h); s < shape.first_of_level(h + 1); ++s) {
      for (Action a : kActions) {
        if (t.Q(s, a) < 1.0 - kOnPathTolerance) continue;
        if (slot) {
          throw VariantError("level " + std::to_string(h) + " has more than one pair with Q* = 1");
        }
        slot = std::make_pair(s, a);
      }
    }
  }
  return out;
}

LinearCertificate theta_for_q(const TreeMDP& mdp, const FeatureMap& fmap) {
  return theta_from_tables(mdp, fmap, exact_optimal(mdp));
}

LinearCertificate theta_for_q(const TreeMDP& mdp, const FeatureMap& fmap, const Policy& pi) {
  return theta_from_tables(mdp, fmap, exact_policy_values(mdp, pi));
}

LinearCertificate linear_mdp_maps(const TreeMDP& mdp, const FeatureMap& fmap) {
  require_matching(mdp, fmap);
  const auto rewarding = mdp.nonzero_rewards();
  if (rewarding.size() != 1 || rewarding.front().value != 1.0) {
    throw VariantError("linear-MDP certificate needs exactly one unit reward");
  }
  const TreeShape& shape = mdp.shape();
  LinearCertificate cert;
  cert.theta = theta_for_q(mdp, fmap).theta;
  RowMatrix psi = RowMatrix::Zero(static_cast<Eigen::Index>(shape.num_states()), fmap.dim());
  for (StateId s = 1; s < shape.num_states(); ++s) {
    const auto [p, a] = shape.parent(s);
    psi.row(static_cast<Eigen::Index>(s)) = fmap(p, a).transpose();
  }
  cert.psi = std::move(psi);
  cert.beta.assign(static_cast<std::size_t>(mdp.horizon()), Vector::Zero(fmap.dim()));
  const auto& r = rewarding.front();
  cert.beta[static_cast<std::size_t>(shape.level_of(r.state))] = fmap(r.state, r.action);
  return cert;
}

LinearCertificate sign_certificate(const TreeMDP& mdp) {
  const auto pairs = on_path_pairs(mdp);
  LinearCertificate cert;
  for (int h = 0; h < mdp.horizon(); ++h) {
    const auto& pair = pairs[static_cast<std::size_t>(h)];
    const bool a2 = pair && pair->second == Action::A2;
    cert.theta.push_back(Vector::Constant(1, a2 ? -1.0 : 1.0));
  }
  return cert;
}

LinearCertificate theta_for_policy_lb(const TreeMDP& mdp, const FeatureMap& fmap) {
  require_matching(mdp, fmap);
  if (fmap.kind() != FeatureKind::policy_lb) {
    throw InvalidArgument("theta_for_policy_lb needs policy-LB features");
  }
  const VectorSet& packing = *fmap.backing();
  const double eps = packing.eps;
  const int H = mdp.horizon();
  const Eigen::Index half = H / 2;
  const TreeShape& shape = mdp.shape();
  const ValueTables t = exact_optimal(mdp);

  LinearCertificate cert;
  cert.theta.assign(static_cast<std::size_t>(H), lifted_a1_certificate(H));
  for (int h = 0; h + 1 < H; ++h) {
    std::optional<StateId> a2_state;
    const StateId first = shape.first_of_level(h);
    const StateId end = shape.first_of_level(h + 1);
    for (StateId s = first; s < end; ++s) {
      if (t.Q(s, Action::A2) > t.Q(s, Action::A1) + kTieTolerance) {
        if (a2_state) {
          throw VariantError("level " + std::to_string(h) + " has several A2-optimal states");
        }
        a2_state = s;
      }
    }
    if (!a2_state) continue;

    const Vector p = packing.row(*a2_state).transpose();
    for (StateId s = first; s < end; ++s) {
      if (s == *a2_state) continue;
      const Vector q = packing.row(s).transpose();
      if (separator_value(p, q, eps) > -eps / 4.0 + 1e-12) {
        throw InfeasibleError("packing points of states " + std::to_string(*a2_state) + " and " +
                              std::to_string(s) + " are closer than sqrt(eps)");
      }
    }
    // omega = [p; -(1 - eps/4)] separates the lifted point p from the rest.
    Vector theta = Vector::Zero(H);
    theta.head(half - 1) = p;
    theta(half - 1) = -(1.0 - eps / 4.0);
    theta.normalize();
    cert.theta[static_cast<std::size_t>(h)] = theta;
  }
  return cert;
}

}  // namespace linlb
