#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linlb/features.hpp"
#include "linlb/rng.hpp"
#include "linlb/tree_mdp.hpp"

namespace linlb {

enum class QueryMode { rl, generative, known_transition };

std::string_view to_string(QueryMode m);
QueryMode parse_query_mode(std::string_view text);

struct Step {
  StateId state;
  Action action;
  double reward;
};
using Trajectory = std::vector<Step>;

/// Read-only transition access. Carries no reward information.
class TransitionView {
 public:
  explicit TransitionView(TreeShape shape) : shape_(shape) {}

  int horizon() const { return shape_.horizon(); }
  StateId child(StateId s, Action a) const { return shape_.child(s, a); }
  std::pair<StateId, Action> parent(StateId s) const { return shape_.parent(s); }
  int level_of(StateId s) const { return shape_.level_of(s); }

 private:
  TreeShape shape_;
};

/// Stateful handle for one learner run against one query model.
///
/// Every episode, rollout or single-step probe costs exactly one trajectory;
/// the counter never exceeds the budget (requests that would are refused
/// with BudgetExhausted before any sampling happens). Transition access in
/// known-transition mode is free. Root episodes are available in every mode,
/// since the generative models can also start at the root.
class OracleSession {
 public:
  OracleSession(QueryMode mode, std::shared_ptr<const TreeMDP> mdp,
                std::optional<std::uint64_t> budget, std::uint64_t seed);

  QueryMode mode() const { return mode_; }
  int horizon() const { return shape_.horizon(); }
  const TreeShape& shape() const { return shape_; }
  /// True when the instance declares deterministic rewards.
  bool declared_noise_free() const { return mdp_->deterministic(); }

  std::uint64_t trajectories_used() const { return used_; }
  std::optional<std::uint64_t> budget() const { return budget_; }
  std::optional<std::uint64_t> remaining() const;

  /// One root-to-leaf episode playing `actions` (length H - 1).
  Trajectory rl_episode(std::span<const Action> actions);
  Trajectory rl_episode(const Policy& pi);

  /// Plays `first` at `start`, then `rollout` down to a leaf; returns the
  /// observed return. Generative and known-transition modes only.
  double gm_rollout(StateId start, Action first, const Policy& rollout);

  /// Mean return of `count` independent gm_rollout calls; charges `count`.
  double gm_rollout_mean(StateId start, Action first, const Policy& rollout,
                         std::uint64_t count);

  struct Probe {
    double reward;
    StateId next_state;
  };
  /// Length-one rollout at (s, a).
  Probe gm_probe(StateId s, Action a);

  TransitionView known_transition_view() const;

 private:
  void charge(std::uint64_t n);
  void require_generative(const char* what) const;
  double sample_reward(StateId s, Action a, double running);

  QueryMode mode_;
  std::shared_ptr<const TreeMDP> mdp_;
  TreeShape shape_;
  std::optional<std::uint64_t> budget_;
  std::uint64_t used_ = 0;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// INDEX-QUERY

/// Emits guesses for a hidden index in [0, n); only ever told "wrong".
class IndexSolver {
 public:
  virtual ~IndexSolver() = default;
  virtual std::string name() const = 0;
  virtual void reset(std::uint64_t n, std::uint64_t seed) = 0;
  /// Next guess, or nullopt when the solver gives up.
  virtual std::optional<std::uint64_t> next_guess() = 0;
};

/// Known solver names: sweep, reverse, uniform, stride, never.
std::unique_ptr<IndexSolver> make_index_solver(std::string_view name);

struct IndqResult {
  bool found = false;
  std::uint64_t queries = 0;
};

/// Drives `solver` against the hidden `istar` with truthful equality answers.
IndqResult indq_run(IndexSolver& solver, std::uint64_t n, std::uint64_t istar,
                    std::uint64_t query_budget, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Learner harness

struct LearnerContext {
  const FeatureMap* features = nullptr;
  std::optional<TransitionView> transitions;
  std::uint64_t seed = 0;
};

struct LearnerOutcome {
  Policy policy;
  /// False when the learner stopped early (budget exhausted).
  bool complete = true;
};

using Learner = std::function<LearnerOutcome(OracleSession&, const LearnerContext&)>;

/// 1/2 for the value and one-hot families, 1/4 for the policy family.
double success_threshold(Variant v);

struct ReductionResult {
  bool success = false;
  std::uint64_t trajectories = 0;
  double value_found = 0.0;
  double opt_value = 0.0;
  bool complete = true;
  Policy policy{1};
};

struct ReductionOptions {
  Variant variant = Variant::value_lb;
  QueryMode mode = QueryMode::rl;
  std::uint64_t seed = 0;
  const FeatureMap* features = nullptr;
};

/// Runs `learner` on the hard instance for `istar`, then judges the returned
/// policy by exact DP against the family's success threshold.
ReductionResult reduction_adapter(const Learner& learner, int horizon, std::uint64_t istar,
                                  std::uint64_t budget, const ReductionOptions& options = {});

/// Same judgement on an arbitrary instance.
ReductionResult run_learner(const Learner& learner, std::shared_ptr<const TreeMDP> mdp,
                            QueryMode mode, std::optional<std::uint64_t> budget,
                            std::uint64_t seed, const FeatureMap* features = nullptr);

}  // namespace linlb
