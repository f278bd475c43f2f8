#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "linlb/features.hpp"
#include "linlb/tree_mdp.hpp"

namespace linlb {

/// Additive slack applied on the favorable side of every threshold.
inline constexpr double kVerifyTolerance = 1e-9;

struct Witness {
  StateId state = 0;
  std::optional<Action> action;
  int level = 0;
  std::optional<StateId> next_state;
};

/// Worst absolute prediction error, split by the relation of (s, a) to the
/// level's on-path pair (s_h, a_h).
struct CaseBreakdown {
  double off_action = 0.0;        // a != a_h
  double on_action_other = 0.0;   // a == a_h, s != s_h
  double on_path = 0.0;           // (s, a) == (s_h, a_h)
  std::uint64_t levels_without_path = 0;
};

/// pass <=> worst_violation <= threshold + tolerance.
struct VerificationReport {
  std::string assumption;
  bool pass = false;
  double worst_violation = 0.0;
  double threshold = 0.0;
  double tolerance = kVerifyTolerance;
  std::optional<Witness> witness;
  std::optional<CaseBreakdown> cases;
  std::string detail;
};

/// max |Q*(s,a) - <theta_h, phi(s,a)>| over every internal (s, a).
VerificationReport check_q_linear(const TreeMDP& mdp, const FeatureMap& fmap,
                                  const LinearCertificate& cert, double delta);
/// Same scan against Q^pi.
VerificationReport check_q_linear(const TreeMDP& mdp, const FeatureMap& fmap,
                                  const LinearCertificate& cert, const Policy& pi, double delta);

/// Runs check_q_linear with the structural theta^pi certificate for pi*, the
/// two constant policies and k seeded random policies; reports the worst.
VerificationReport check_policy_completeness(const TreeMDP& mdp, const FeatureMap& fmap,
                                             double delta, int k, std::uint64_t seed);

inline constexpr int kLinearMdpLimit = 11;

/// Transition error |1{s' = child(s,a)} - <psi(s'), phi(s,a)>| over all
/// (s, a, s') one level apart, and reward error |r(s,a) - <beta_h, phi(s,a)>|.
VerificationReport check_linear_mdp(const TreeMDP& mdp, const FeatureMap& fmap,
                                    const LinearCertificate& cert, double delta);

/// Some optimal action attains argmax_a <theta_h, phi(s,a)> at every state.
VerificationReport check_policy_realizable(const TreeMDP& mdp, const FeatureMap& fmap,
                                           const LinearCertificate& cert);

/// Unit norms, a unique optimal action everywhere, and score margin >= margin.
VerificationReport check_margin(const TreeMDP& mdp, const FeatureMap& fmap,
                                const LinearCertificate& cert, double margin);

/// min positive gap >= gamma.
VerificationReport check_gap(const TreeMDP& mdp, double gamma);

}  // namespace linlb
