#include "linlb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "linlb/errors.hpp"
#include "linlb/features.hpp"
#include "linlb/instances.hpp"
#include "linlb/io.hpp"
#include "linlb/learners.hpp"
#include "linlb/oracle.hpp"
#include "linlb/verify.hpp"

namespace linlb {
namespace {

// Feature construction enumerates one vector per state.
constexpr int kMaxFeatureHorizon = 16;

const std::set<std::string> kLearners = {"uniform", "lsvi", "lsvi-batch", "gap", "eps", "cheat"};

bool needs_features(const std::string& learner) {
  return learner == "lsvi" || learner == "lsvi-batch" || learner == "gap" || learner == "eps";
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad field '") + key + "': " + e.what());
  }
}

// Everything the learners of one (H, seed) cell share.
struct Cell {
  std::shared_ptr<const TreeMDP> mdp;
  std::optional<FeatureMap> fmap;
  int d = 0;
  double delta = 0.0;
  double margin = 0.0;
  double gamma = 0.0;
};

void require(const VerificationReport& r) {
  if (!r.pass) {
    throw ConstructionFailed("verification '" + r.assumption + "' failed: worst violation " +
                             std::to_string(r.worst_violation) + " > " +
                             std::to_string(r.threshold));
  }
}

Cell build_cell(const SweepConfig& c, int H, std::uint64_t cell_seed, bool features) {
  Cell cell;
  const TreeShape shape(H);
  Rng rng = make_rng(cell_seed, 0);
  const std::uint64_t istar =
      std::uniform_int_distribution<std::uint64_t>(0, shape.num_leaves() - 1)(rng);
  const bool feat = features || c.verify;
  if (feat && H > kMaxFeatureHorizon) {
    throw CapacityError("feature construction supports H <= " + std::to_string(kMaxFeatureHorizon));
  }

  if (c.variant == "value-lb") {
    cell.mdp = std::make_shared<TreeMDP>(make_value_lb(H, istar));
    cell.delta = c.delta;
    cell.gamma = 1.0;
    cell.d = 2 * jl_dimension(shape.num_states() + 1, c.delta);
    if (feat) {
      cell.fmap = FeatureMap::block(sample_jl_set(shape.num_states() + 1, c.delta, mix_seed(cell_seed, 1)), H);
      cell.d = cell.fmap->dim();
    }
    if (c.verify) {
      const LinearCertificate cert = theta_for_q(*cell.mdp, *cell.fmap);
      require(check_q_linear(*cell.mdp, *cell.fmap, cert, c.delta));
      require(check_gap(*cell.mdp, cell.gamma));
      require(check_policy_completeness(*cell.mdp, *cell.fmap, c.delta, c.verify_k, mix_seed(cell_seed, 2)));
      if (H <= kLinearMdpLimit) {
        require(check_linear_mdp(*cell.mdp, *cell.fmap, linear_mdp_maps(*cell.mdp, *cell.fmap), c.delta));
      }
    }
  } else if (c.variant == "policy-lb") {
    cell.mdp = std::make_shared<TreeMDP>(make_policy_lb(H, istar));
    cell.gamma = 1.0 / (2.0 * H);
    cell.d = H;
    if (feat) {
      const auto search = max_feasible_packing(H / 2 - 1, shape.num_states(), mix_seed(cell_seed, 1));
      if (!search) throw InfeasibleError("no feasible packing for H = " + std::to_string(H));
      cell.fmap = FeatureMap::policy_lb(search->packing, H);
      cell.margin = search->margin;
      if (c.verify) {
        const LinearCertificate cert = theta_for_policy_lb(*cell.mdp, *cell.fmap);
        require(check_policy_realizable(*cell.mdp, *cell.fmap, cert));
        require(check_margin(*cell.mdp, *cell.fmap, cert, cell.margin));
        require(check_gap(*cell.mdp, cell.gamma));
      }
    }
  } else if (c.variant == "onehot") {
    auto [mdp, fmap] = make_onehot(H, istar, c.noise, mix_seed(cell_seed, 3));
    cell.mdp = std::make_shared<TreeMDP>(std::move(mdp));
    cell.fmap = std::move(fmap);
    cell.d = cell.fmap->dim();
    cell.gamma = c.gamma;
    if (c.verify) {
      require(check_q_linear(*cell.mdp, *cell.fmap, theta_for_q(*cell.mdp, *cell.fmap), 0.0));
      require(check_gap(*cell.mdp, c.gamma));
    }
  } else {
    throw ConfigError("unknown variant '" + c.variant + "'");
  }
  return cell;
}

ExperimentRecord run_cell_learner(const SweepConfig& c, const Cell& cell, int H,
                                  std::uint64_t seed, const std::string& name,
                                  std::uint64_t learner_seed) {
  const QueryMode mode = parse_query_mode(c.mode);
  const GmParams params{c.fail_prob, 2.0};
  const bool deterministic = cell.mdp->deterministic();
  const std::uint64_t episode_budget =
      c.budget ? *c.budget : std::uint64_t{1} << std::min(H + c.budget_offset, 62);
  const auto lsvi_samples = static_cast<std::uint64_t>(std::ceil(c.lsvi_samples_factor * cell.d));

  std::uint64_t budget = episode_budget;
  Learner learner;
  if (name == "uniform") {
    learner = [&](OracleSession& s, const LearnerContext& ctx) {
      return baseline_uniform(s, episode_budget, ctx.seed);
    };
  } else if (name == "lsvi") {
    learner = [&](OracleSession& s, const LearnerContext& ctx) {
      return lsvi_episodic(s, *ctx.features, c.lsvi_regularizer, episode_budget, ctx.seed);
    };
  } else if (name == "lsvi-batch") {
    budget = c.budget ? *c.budget : lsvi_samples * static_cast<std::uint64_t>(H - 1);
    learner = [&](OracleSession& s, const LearnerContext& ctx) {
      return baseline_lsvi(s, *ctx.features, lsvi_samples, c.lsvi_regularizer, ctx.seed);
    };
  } else if (name == "gap" || name == "eps") {
    const bool gap = name == "gap";
    const double target = gap ? cell.gamma : c.eps;
    budget = c.budget ? *c.budget
                      : (deterministic ? gm_planned_trajectories(*cell.fmap, gap, target, params, true)
                                       : gm_trajectory_ceiling(*cell.fmap, gap, target, params));
    learner = [&, gap, target](OracleSession& s, const LearnerContext&) {
      return gap ? gm_gap_learner(s, *cell.fmap, target, params)
                 : gm_eps_learner(s, *cell.fmap, target, params);
    };
  } else if (name == "cheat") {
    learner = [&](OracleSession& s, const LearnerContext&) {
      const Policy pi = Policy::route_to(s.shape(), *cell.mdp->special_leaf());
      s.rl_episode(pi);
      return LearnerOutcome{pi, true};
    };
  } else {
    throw ConfigError("unknown learner '" + name + "'");
  }

  const ReductionResult res = run_learner(learner, cell.mdp, mode, budget, learner_seed,
                                          cell.fmap ? &*cell.fmap : nullptr);
  ExperimentRecord r;
  r.experiment = c.experiment;
  r.H = H;
  r.d = cell.d;
  r.delta = cell.delta;
  r.margin = cell.margin;
  r.gamma = cell.gamma;
  r.noise = cell.mdp->noise_amplitude();
  r.seed = seed;
  r.learner = name;
  r.budget = budget;
  r.trajectories_used = res.trajectories;
  r.success = res.success;
  r.value_found = res.value_found;
  r.opt_value = res.opt_value;
  return r;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "variant", "mode", "horizons", "H_range", "learners", "seeds", "seed",
      "delta", "budget_offset", "budget", "lsvi_regularizer", "lsvi_samples_factor", "gamma",
      "eps", "fail_prob", "noise", "verify", "verify_k", "workers"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  SweepConfig c;
  read_opt(j, "experiment", c.experiment);
  read_opt(j, "variant", c.variant);
  read_opt(j, "mode", c.mode);
  read_opt(j, "horizons", c.horizons);
  if (j.contains("H_range")) {
    std::vector<int> range;
    read_opt(j, "H_range", range);
    if (range.size() != 2 || range[0] > range[1]) throw ConfigError("H_range is [lo, hi]");
    for (int h = range[0]; h <= range[1]; ++h) c.horizons.push_back(h);
  }
  read_opt(j, "learners", c.learners);
  read_opt(j, "seeds", c.seeds);
  read_opt(j, "seed", c.base_seed);
  read_opt(j, "delta", c.delta);
  read_opt(j, "budget_offset", c.budget_offset);
  if (j.contains("budget") && !j.at("budget").is_null()) {
    std::uint64_t b = 0;
    read_opt(j, "budget", b);
    c.budget = b;
  }
  read_opt(j, "lsvi_regularizer", c.lsvi_regularizer);
  read_opt(j, "lsvi_samples_factor", c.lsvi_samples_factor);
  read_opt(j, "gamma", c.gamma);
  read_opt(j, "eps", c.eps);
  read_opt(j, "fail_prob", c.fail_prob);
  read_opt(j, "noise", c.noise);
  read_opt(j, "verify", c.verify);
  read_opt(j, "verify_k", c.verify_k);
  read_opt(j, "workers", c.workers);

  if (c.variant != "value-lb" && c.variant != "policy-lb" && c.variant != "onehot") {
    throw ConfigError("variant must be value-lb, policy-lb or onehot");
  }
  try {
    (void)parse_query_mode(c.mode);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  for (int h : c.horizons) {
    if (h < 2 || h > kMaxStoredHorizon) throw ConfigError("horizons must lie in [2, 24]");
  }
  for (const auto& l : c.learners) {
    if (!kLearners.count(l)) throw ConfigError("unknown learner '" + l + "'");
  }
  if (c.seeds < 0) throw ConfigError("seeds must be non-negative");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (c.budget_offset < -2 || c.budget_offset > 20) throw ConfigError("budget_offset out of range");
  if (!(c.lsvi_regularizer > 0.0)) throw ConfigError("lsvi_regularizer must be positive");
  if (!(c.lsvi_samples_factor >= 0.0)) throw ConfigError("lsvi_samples_factor must be non-negative");
  if (!(c.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(c.eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(c.fail_prob > 0.0 && c.fail_prob < 1.0)) throw ConfigError("fail_prob must lie in (0, 1)");
  if (!(c.noise >= 0.0 && c.noise <= 1.0)) throw ConfigError("noise must lie in [0, 1]");
  if (c.verify_k < 0) throw ConfigError("verify_k must be non-negative");
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  return c;
}

nlohmann::json to_json(const SweepConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  j["experiment"] = c.experiment;
  j["variant"] = c.variant;
  j["mode"] = c.mode;
  j["horizons"] = c.horizons;
  j["learners"] = c.learners;
  j["seeds"] = c.seeds;
  j["seed"] = c.base_seed;
  j["delta"] = c.delta;
  j["budget_offset"] = c.budget_offset;
  j["budget"] = c.budget ? nlohmann::json(*c.budget) : nlohmann::json(nullptr);
  j["lsvi_regularizer"] = c.lsvi_regularizer;
  j["lsvi_samples_factor"] = c.lsvi_samples_factor;
  j["gamma"] = c.gamma;
  j["eps"] = c.eps;
  j["fail_prob"] = c.fail_prob;
  j["noise"] = c.noise;
  j["verify"] = c.verify;
  j["verify_k"] = c.verify_k;
  j["workers"] = c.workers;
  return j;
}

SweepResult run_sweep(const SweepConfig& config) {
  const std::size_t nh = config.horizons.size();
  const std::size_t nl = config.learners.size();
  const std::size_t ns = static_cast<std::size_t>(std::max(config.seeds, 0));
  SweepResult out;
  if (nh == 0 || nl == 0 || ns == 0) return out;

  const bool features =
      std::any_of(config.learners.begin(), config.learners.end(), needs_features);
  // Slot [(h * nl + l) * ns + s]; filled by whichever worker owns cell (h, s).
  std::vector<std::optional<ExperimentRecord>> slots(nh * nl * ns);
  std::vector<std::optional<CellError>> slot_errors(nh * nl * ns);
  std::vector<std::optional<CellError>> cell_errors(nh * ns);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx; (idx = next.fetch_add(1)) < nh * ns;) {
      const std::size_t hi = idx / ns;
      const std::size_t si = idx % ns;
      const int H = config.horizons[hi];
      const std::uint64_t cell_seed = mix_seed(mix_seed(config.base_seed, static_cast<std::uint64_t>(H)), si);
      Cell cell;
      try {
        cell = build_cell(config, H, cell_seed, features);
      } catch (const std::exception& e) {
        cell_errors[idx] = CellError{H, si, "", e.what()};
        continue;
      }
      for (std::size_t li = 0; li < nl; ++li) {
        const std::size_t slot = (hi * nl + li) * ns + si;
        try {
          slots[slot] = run_cell_learner(config, cell, H, si, config.learners[li],
                                         mix_seed(cell_seed, 100 + li));
        } catch (const std::exception& e) {
          slot_errors[slot] = CellError{H, si, config.learners[li], e.what()};
        }
      }
    }
  };
  const int n_threads = std::max(1, config.workers);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < cell_errors.size(); ++i) {
    if (cell_errors[i]) out.errors.push_back(*cell_errors[i]);
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) out.records.push_back(std::move(*slots[i]));
    if (slot_errors[i]) out.errors.push_back(*slot_errors[i]);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ScalingFit fit_scaling_points(const std::vector<std::pair<int, double>>& points) {
  std::set<int> distinct;
  for (const auto& p : points) {
    if (!(p.second > 0.0)) throw InvalidArgument("scaling fit needs positive counts");
    distinct.insert(p.first);
  }
  if (distinct.size() < 3) throw InvalidArgument("scaling fit needs at least 3 distinct H values");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [h, v] : points) {
    mx += h;
    my += std::log2(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [h, v] : points) {
    const double dx = h - mx, dy = std::log2(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.medians = points;
  return fit;
}

ScalingFit fit_scaling(const std::vector<ExperimentRecord>& records) {
  // Failed runs are right-censored: they count as +inf, so the median is the
  // unbiased trajectories-to-success median whenever over half the runs succeed.
  std::map<int, std::vector<double>> by_h;
  for (const auto& r : records) {
    by_h[r.H].push_back(r.success ? static_cast<double>(r.trajectories_used)
                                  : std::numeric_limits<double>::infinity());
  }
  std::vector<std::pair<int, double>> points;
  for (auto& [h, v] : by_h) {
    const double m = median(std::move(v));
    if (std::isfinite(m)) points.emplace_back(h, m);
  }
  return fit_scaling_points(points);
}

std::string csv_header() {
  return "experiment,H,d,delta,margin,gamma,noise,seed,learner,budget,trajectories_used,success,"
         "value_found,opt_value\n";
}

std::string to_csv_row(const ExperimentRecord& r) {
  std::string s;
  s += r.experiment + ',' + std::to_string(r.H) + ',' + std::to_string(r.d) + ',';
  s += fmt_double(r.delta) + ',' + fmt_double(r.margin) + ',' + fmt_double(r.gamma) + ',';
  s += fmt_double(r.noise) + ',' + std::to_string(r.seed) + ',' + r.learner + ',';
  s += std::to_string(r.budget) + ',' + std::to_string(r.trajectories_used) + ',';
  s += (r.success ? "true" : "false");
  s += ',' + fmt_double(r.value_found) + ',' + fmt_double(r.opt_value) + '\n';
  return s;
}

std::string to_csv(const std::vector<ExperimentRecord>& records) {
  std::string s = csv_header();
  for (const auto& r : records) s += to_csv_row(r);
  return s;
}

std::string to_jsonl(const std::vector<ExperimentRecord>& records) {
  std::string s;
  for (const auto& r : records) s += dump_line(to_json(r));
  return s;
}

std::string to_gnuplot(const ScalingFit& fit) {
  std::string s = "# H median_trajectories\n";
  for (const auto& [h, m] : fit.medians) s += std::to_string(h) + ' ' + fmt_double(m) + '\n';
  return s;
}

}  // namespace linlb
