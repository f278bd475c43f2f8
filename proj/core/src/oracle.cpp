#include "linlb/oracle.hpp"

#include <algorithm>

#include "linlb/errors.hpp"
#include "linlb/instances.hpp"

namespace linlb {

std::string_view to_string(QueryMode m) {
  switch (m) {
    case QueryMode::rl: return "rl";
    case QueryMode::generative: return "generative";
    case QueryMode::known_transition: return "known-transition";
  }
  return "rl";
}

QueryMode parse_query_mode(std::string_view text) {
  if (text == "rl") return QueryMode::rl;
  if (text == "generative") return QueryMode::generative;
  if (text == "known-transition") return QueryMode::known_transition;
  throw InvalidArgument("unknown query mode '" + std::string(text) + "'");
}

OracleSession::OracleSession(QueryMode mode, std::shared_ptr<const TreeMDP> mdp,
                             std::optional<std::uint64_t> budget, std::uint64_t seed)
    : mode_(mode),
      mdp_(std::move(mdp)),
      shape_(mdp_ ? mdp_->shape() : throw InvalidArgument("session needs an instance")),
      budget_(budget),
      rng_(make_rng(seed, mdp_->noise_seed())) {}

std::optional<std::uint64_t> OracleSession::remaining() const {
  if (!budget_) return std::nullopt;
  return *budget_ - used_;
}

void OracleSession::charge(std::uint64_t n) {
  if (budget_ && n > *budget_ - used_) {
    throw BudgetExhausted("trajectory budget of " + std::to_string(*budget_) + " exhausted");
  }
  used_ += n;
}

void OracleSession::require_generative(const char* what) const {
  if (mode_ == QueryMode::rl) {
    throw ModeError(std::string(what) + " is not available in rl mode");
  }
}

double OracleSession::sample_reward(StateId s, Action a, double running) {
  const double mean = mdp_->reward(s, a);
  const double amp = mdp_->noise_amplitude();
  if (amp == 0.0 || mean == 0.0) return mean;
  std::uniform_real_distribution<double> u(-amp, amp);
  const double x = std::clamp(mean + u(rng_), 0.0, 1.0);
  return std::min(x, std::max(0.0, 1.0 - running));
}

Trajectory OracleSession::rl_episode(std::span<const Action> actions) {
  if (actions.size() != static_cast<std::size_t>(horizon() - 1)) {
    throw InvalidArgument("an episode needs exactly H - 1 actions");
  }
  charge(1);
  Trajectory out;
  out.reserve(actions.size());
  StateId s = 0;
  double running = 0.0;
  for (Action a : actions) {
    const double r = sample_reward(s, a, running);
    running += r;
    out.push_back({s, a, r});
    s = shape_.child(s, a);
  }
  return out;
}

Trajectory OracleSession::rl_episode(const Policy& pi) {
  std::vector<Action> actions;
  actions.reserve(static_cast<std::size_t>(horizon() - 1));
  for (StateId s = 0; s < shape_.num_internal();) {
    actions.push_back(pi(s));
    s = shape_.child(s, pi(s));
  }
  return rl_episode(actions);
}

double OracleSession::gm_rollout(StateId start, Action first, const Policy& rollout) {
  return gm_rollout_mean(start, first, rollout, 1);
}

double OracleSession::gm_rollout_mean(StateId start, Action first, const Policy& rollout,
                                      std::uint64_t count) {
  require_generative("gm_rollout");
  if (count == 0) throw InvalidArgument("rollout count must be positive");
  if (shape_.is_leaf(start)) throw NoChildError("cannot roll out from a leaf");
  charge(count);

  // Transitions are deterministic, so the visited edges are fixed; only
  // edges with nonzero mean carry noise.
  std::vector<std::pair<StateId, Action>> edges;
  for (StateId s = start; s < shape_.num_internal();) {
    const Action a = edges.empty() ? first : rollout(s);
    edges.emplace_back(s, a);
    s = shape_.child(s, a);
  }
  if (mdp_->deterministic()) {
    double total = 0.0;
    for (auto [s, a] : edges) total += mdp_->reward(s, a);
    return total;
  }
  std::vector<std::pair<StateId, Action>> noisy;
  for (auto e : edges) {
    if (mdp_->reward(e.first, e.second) != 0.0) noisy.push_back(e);
  }
  if (noisy.empty()) return 0.0;
  double sum = 0.0;
  for (std::uint64_t k = 0; k < count; ++k) {
    double running = 0.0;
    for (auto [s, a] : noisy) running += sample_reward(s, a, running);
    sum += running;
  }
  return sum / static_cast<double>(count);
}

OracleSession::Probe OracleSession::gm_probe(StateId s, Action a) {
  require_generative("gm_probe");
  if (shape_.is_leaf(s)) throw NoChildError("cannot probe a leaf");
  charge(1);
  return {sample_reward(s, a, 0.0), shape_.child(s, a)};
}

TransitionView OracleSession::known_transition_view() const {
  if (mode_ != QueryMode::known_transition) {
    throw ModeError("transition access requires known-transition mode");
  }
  return TransitionView(shape_);
}

// ---------------------------------------------------------------------------
// Learner harness

double success_threshold(Variant v) { return v == Variant::policy_lb ? 0.25 : 0.5; }

ReductionResult run_learner(const Learner& learner, std::shared_ptr<const TreeMDP> mdp,
                            QueryMode mode, std::optional<std::uint64_t> budget,
                            std::uint64_t seed, const FeatureMap* features) {
  OracleSession session(mode, mdp, budget, mix_seed(seed, 1));
  LearnerContext ctx;
  ctx.features = features;
  ctx.seed = mix_seed(seed, 2);
  if (mode == QueryMode::known_transition) ctx.transitions = session.known_transition_view();

  LearnerOutcome outcome = learner(session, ctx);
  ReductionResult r;
  r.trajectories = session.trajectories_used();
  r.complete = outcome.complete;
  r.opt_value = exact_optimal(*mdp).V(0);
  r.value_found = exact_policy_values(*mdp, outcome.policy).V(0);
  r.success = r.value_found >= r.opt_value - success_threshold(mdp->variant()) - 1e-12;
  r.policy = std::move(outcome.policy);
  return r;
}

ReductionResult reduction_adapter(const Learner& learner, int horizon, std::uint64_t istar,
                                  std::uint64_t budget, const ReductionOptions& options) {
  std::shared_ptr<const TreeMDP> mdp;
  switch (options.variant) {
    case Variant::policy_lb:
      mdp = std::make_shared<TreeMDP>(make_policy_lb(horizon, istar));
      break;
    case Variant::value_lb:
    case Variant::onehot:
    case Variant::custom:
      mdp = std::make_shared<TreeMDP>(make_value_lb(horizon, istar));
      break;
  }
  return run_learner(learner, std::move(mdp), options.mode, budget, options.seed,
                     options.features);
}

}  // namespace linlb
