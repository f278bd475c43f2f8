// Command-line front end: instance generation, verification, INDEX-QUERY
// trials, sweeps, upper-bound runs and scaling fits.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "linlb/errors.hpp"
#include "linlb/experiment.hpp"
#include "linlb/features.hpp"
#include "linlb/instances.hpp"
#include "linlb/io.hpp"
#include "linlb/learners.hpp"
#include "linlb/oracle.hpp"
#include "linlb/verify.hpp"

namespace {

using namespace linlb;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string format = "csv";
  int workers = 0;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(g.out, text);
  }
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string variant = "value-lb";
  int H = 8;
  std::optional<std::uint64_t> istar;
  double delta = 0.7;
  double noise = 0.0;
  bool features = false;
};

int run_gen(const Globals& g, const GenArgs& a) {
  const TreeShape shape(a.H);
  Rng rng = make_rng(g.seed, 0);
  const std::uint64_t istar =
      a.istar ? *a.istar
              : std::uniform_int_distribution<std::uint64_t>(0, shape.num_leaves() - 1)(rng);

  json features = nullptr;
  json params = json::object();
  params["variant"] = a.variant;
  params["H"] = a.H;
  params["istar"] = istar;
  std::optional<TreeMDP> mdp;
  if (a.variant == "value-lb") {
    mdp = make_value_lb(a.H, istar);
    params["delta"] = a.delta;
    if (a.features) {
      features = to_json(FeatureMap::block(sample_jl_set(shape.num_states() + 1, a.delta, mix_seed(g.seed, 1)), a.H));
    }
  } else if (a.variant == "policy-lb") {
    mdp = make_policy_lb(a.H, istar);
    if (a.features) {
      const auto search = max_feasible_packing(a.H / 2 - 1, shape.num_states(), mix_seed(g.seed, 1));
      if (!search) throw InfeasibleError("no feasible packing");
      params["margin"] = search->margin;
      params["packing_eps"] = search->eps;
      features = to_json(FeatureMap::policy_lb(search->packing, a.H));
    }
  } else if (a.variant == "onehot") {
    auto built = make_onehot(a.H, istar, a.noise, mix_seed(g.seed, 3));
    mdp = std::move(built.first);
    if (a.features) features = to_json(built.second);
  } else {
    throw ConfigError("variant must be value-lb, policy-lb or onehot");
  }
  if (a.noise > 0.0 && a.variant != "onehot") *mdp = add_reward_noise(*mdp, a.noise, mix_seed(g.seed, 3));
  params["noise"] = a.noise;

  json doc = to_json(*mdp);
  json prov = json::object();
  prov["generator"] = "linlb gen";
  prov["parameters"] = params;
  prov["seed"] = g.seed;
  doc["provenance"] = std::move(prov);
  if (!features.is_null()) doc["features"] = std::move(features);
  emit(g, doc.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string instance;
  std::string features;
  std::string assumption = "all";
  double delta = 0.7;
  std::optional<double> margin;
  std::optional<double> gamma;
  int k = 5;
};

FeatureMap load_features(const json& doc, const std::string& path, int H) {
  if (!path.empty()) return feature_map_from_json(read_json_file(path));
  if (doc.contains("features")) return feature_map_from_json(doc.at("features"));
  if (doc.value("variant", "") == "onehot") return FeatureMap::onehot(H);
  throw ConfigError("instance has no features block; pass --features");
}

int run_verify(const Globals& g, const VerifyArgs& a) {
  const json doc = read_json_file(a.instance);
  const TreeMDP mdp = tree_mdp_from_json(doc);
  const std::string& which = a.assumption;
  const bool all = which == "all";
  json reports = json::array();

  std::optional<FeatureMap> fmap;
  auto features = [&]() -> const FeatureMap& {
    if (!fmap) fmap = load_features(doc, a.features, mdp.horizon());
    return *fmap;
  };
  const bool policy_family = mdp.variant() == Variant::policy_lb;
  if (all || which == "gap") {
    const double gamma = a.gamma ? *a.gamma : (policy_family ? 1.0 / (2.0 * mdp.horizon()) : 1.0);
    reports.push_back(to_json(check_gap(mdp, gamma)));
  }
  if (!policy_family) {
    if (all || which == "q-linear") {
      reports.push_back(to_json(check_q_linear(mdp, features(), theta_for_q(mdp, features()), a.delta)));
    }
    if (all || which == "completeness") {
      reports.push_back(to_json(check_policy_completeness(mdp, features(), a.delta, a.k, g.seed)));
    }
    if ((all && mdp.horizon() <= kLinearMdpLimit) || which == "linear-mdp") {
      reports.push_back(to_json(check_linear_mdp(mdp, features(), linear_mdp_maps(mdp, features()), a.delta)));
    }
  } else {
    const auto cert = [&] { return theta_for_policy_lb(mdp, features()); };
    if (all || which == "realizable") {
      reports.push_back(to_json(check_policy_realizable(mdp, features(), cert())));
    }
    if (all || which == "margin") {
      double margin = 0.0;
      if (a.margin) {
        margin = *a.margin;
      } else if (doc.contains("provenance") && doc["provenance"]["parameters"].contains("margin")) {
        margin = doc["provenance"]["parameters"]["margin"].get<double>();
      } else {
        throw ConfigError("pass --margin for margin checks");
      }
      reports.push_back(to_json(check_margin(mdp, features(), cert(), margin)));
    }
  }
  if (reports.empty()) throw ConfigError("assumption '" + which + "' does not apply to this instance");

  bool pass = true;
  std::string text;
  for (const auto& r : reports) {
    pass = pass && r["pass"].get<bool>();
    text += dump_line(r);
  }
  emit(g, text);
  return pass ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// indq

struct IndqArgs {
  std::uint64_t n = 4096;
  std::uint64_t trials = 1000;
  std::string solver = "uniform";
  std::optional<std::uint64_t> budget;
  std::optional<std::uint64_t> istar;
};

int run_indq(const Globals& g, const IndqArgs& a) {
  if (a.n == 0) throw ConfigError("--n must be positive");
  auto solver = make_index_solver(a.solver);
  Rng rng = make_rng(g.seed, 0);
  std::uniform_int_distribution<std::uint64_t> pick(0, a.n - 1);
  std::string text;
  for (std::uint64_t t = 0; t < a.trials; ++t) {
    const std::uint64_t istar = a.istar ? *a.istar : pick(rng);
    const IndqResult r = indq_run(*solver, a.n, istar, a.budget.value_or(a.n), mix_seed(g.seed, t + 1));
    json j = json::object();
    j["trial"] = t;
    j["queries"] = r.queries;
    j["found"] = r.found;
    text += dump_line(j);
  }
  emit(g, text);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// lb-sweep

struct SweepArgs {
  std::string config;
  std::string mirror;
  std::string gnuplot;
};

int run_lb_sweep(const Globals& g, const SweepArgs& a) {
  json j = read_json_file(a.config);
  SweepConfig cfg = sweep_config_from_json(j);
  if (g.seed_set) cfg.base_seed = g.seed;
  if (g.workers > 0) cfg.workers = g.workers;
  const SweepResult res = run_sweep(cfg);

  const std::string csv = to_csv(res.records);
  const std::string jsonl = to_jsonl(res.records);
  emit(g, g.format == "jsonl" ? jsonl : csv);
  if (!a.mirror.empty()) write_text_file(a.mirror, g.format == "jsonl" ? csv : jsonl);
  if (!a.gnuplot.empty()) {
    try {
      write_text_file(a.gnuplot, to_gnuplot(fit_scaling(res.records)));
    } catch (const InvalidArgument& e) {
      std::cerr << "gnuplot output skipped: " << e.what() << "\n";
    }
  }
  for (const CellError& e : res.errors) {
    json err = json::object();
    err["H"] = e.H;
    err["seed"] = e.seed;
    err["learner"] = e.learner;
    err["error"] = e.message;
    std::cerr << dump_line(err);
  }
  return res.errors.empty() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// ub-run

struct UbArgs {
  std::string instance;
  std::string features;
  std::string learner = "gap";
  double gamma = 1.0;
  double eps = 0.25;
  double fail_prob = 0.01;
  double noise = 0.0;
  std::string mode = "generative";
};

int run_ub(const Globals& g, const UbArgs& a) {
  const json doc = read_json_file(a.instance);
  TreeMDP mdp = tree_mdp_from_json(doc);
  if (a.noise > 0.0) mdp = mdp.with_noise(a.noise, mix_seed(g.seed, 3));
  const FeatureMap fmap = load_features(doc, a.features, mdp.horizon());
  const bool gap = a.learner == "gap";
  if (!gap && a.learner != "eps") throw ConfigError("--learner must be gap or eps");
  const GmParams params{a.fail_prob, 2.0};
  const double target = gap ? a.gamma : a.eps;
  const std::uint64_t budget = mdp.deterministic()
                                   ? gm_planned_trajectories(fmap, gap, target, params, true)
                                   : gm_trajectory_ceiling(fmap, gap, target, params);
  const Learner learner = [&](OracleSession& s, const LearnerContext&) {
    return gap ? gm_gap_learner(s, fmap, target, params) : gm_eps_learner(s, fmap, target, params);
  };
  const auto shared = std::make_shared<const TreeMDP>(mdp);
  const ReductionResult res =
      run_learner(learner, shared, parse_query_mode(a.mode), budget, g.seed, &fmap);

  ExperimentRecord r;
  r.experiment = "ub";
  r.H = mdp.horizon();
  r.d = fmap.dim();
  r.gamma = a.gamma;
  r.noise = mdp.noise_amplitude();
  r.seed = g.seed;
  r.learner = a.learner;
  r.budget = budget;
  r.trajectories_used = res.trajectories;
  r.value_found = res.value_found;
  r.opt_value = res.opt_value;
  r.success = gap ? res.policy == exact_optimal(mdp).greedy_policy()
                  : res.value_found >= res.opt_value - a.eps - 1e-12;
  emit(g, g.format == "csv" ? to_csv({r}) : dump_line(to_json(r)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

std::vector<ExperimentRecord> parse_records(const std::string& text) {
  std::vector<ExperimentRecord> out;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '{') {
      out.push_back(experiment_record_from_json(json::parse(line)));
      continue;
    }
    if (!header_seen) {
      if (line + "\n" != csv_header()) throw ConfigError("unexpected CSV header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 14) throw ConfigError("CSV rows need 14 fields");
    ExperimentRecord r;
    r.experiment = f[0];
    r.H = std::stoi(f[1]);
    r.d = std::stoi(f[2]);
    r.delta = std::stod(f[3]);
    r.margin = std::stod(f[4]);
    r.gamma = std::stod(f[5]);
    r.noise = std::stod(f[6]);
    r.seed = std::stoull(f[7]);
    r.learner = f[8];
    r.budget = std::stoull(f[9]);
    r.trajectories_used = std::stoull(f[10]);
    r.success = f[11] == "true";
    r.value_found = std::stod(f[12]);
    r.opt_value = std::stod(f[13]);
    out.push_back(std::move(r));
  }
  return out;
}

struct FitArgs {
  std::string records;
  std::string learner;
};

int run_fit(const Globals& g, const FitArgs& a) {
  std::vector<ExperimentRecord> records = parse_records(read_text_file(a.records));
  if (!a.learner.empty()) {
    std::erase_if(records, [&](const ExperimentRecord& r) { return r.learner != a.learner; });
  }
  const ScalingFit fit = fit_scaling(records);
  json j = json::object();
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r2"] = fit.r2;
  json med = json::array();
  for (const auto& [h, m] : fit.medians) med.push_back(json::array({h, m}));
  j["medians"] = std::move(med);
  emit(g, dump_line(j));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-complexity experiments on binary-tree MDPs with linear features"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--out", g.out, "Output path (default: stdout)");
  app.add_option("--format", g.format, "Record format")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--workers", g.workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a hard instance as JSON");
  gen_cmd->add_option("--variant", gen.variant)->check(CLI::IsMember({"value-lb", "policy-lb", "onehot"}));
  gen_cmd->add_option("--H", gen.H)->required();
  gen_cmd->add_option("--istar", gen.istar, "Special leaf offset (default: drawn from --seed)");
  gen_cmd->add_option("--delta", gen.delta, "JL tolerance for value-lb features");
  gen_cmd->add_option("--noise", gen.noise, "Reward noise amplitude");
  gen_cmd->add_flag("--features", gen.features, "Embed the feature map");

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "Check linear-realizability assumptions");
  ver_cmd->add_option("--instance", ver.instance)->required();
  ver_cmd->add_option("--features", ver.features, "Feature map JSON (default: embedded block)");
  ver_cmd->add_option("--assumption", ver.assumption)
      ->check(CLI::IsMember({"all", "q-linear", "completeness", "linear-mdp", "realizable", "margin", "gap"}));
  ver_cmd->add_option("--delta", ver.delta);
  ver_cmd->add_option("--margin", ver.margin);
  ver_cmd->add_option("--gamma", ver.gamma);
  ver_cmd->add_option("--k", ver.k, "Random policies for completeness");

  IndqArgs indq;
  auto* indq_cmd = app.add_subcommand("indq", "INDEX-QUERY trials");
  indq_cmd->add_option("--n", indq.n);
  indq_cmd->add_option("--trials", indq.trials);
  indq_cmd->add_option("--solver", indq.solver)
      ->check(CLI::IsMember({"sweep", "reverse", "uniform", "stride", "never"}));
  indq_cmd->add_option("--budget", indq.budget, "Query budget (default: n)");
  indq_cmd->add_option("--istar", indq.istar, "Fixed hidden index (default: random per trial)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("lb-sweep", "Run a sweep from a JSON config");
  sweep_cmd->add_option("--config", sweep.config)->required();
  sweep_cmd->add_option("--mirror", sweep.mirror, "Also write the other record format here");
  sweep_cmd->add_option("--gnuplot", sweep.gnuplot, "Write per-H medians for gnuplot");

  UbArgs ub;
  auto* ub_cmd = app.add_subcommand("ub-run", "Run a rollout learner on an instance");
  ub_cmd->add_option("--instance", ub.instance)->required();
  ub_cmd->add_option("--features", ub.features);
  ub_cmd->add_option("--learner", ub.learner)->check(CLI::IsMember({"gap", "eps"}));
  ub_cmd->add_option("--gamma", ub.gamma);
  ub_cmd->add_option("--eps", ub.eps);
  ub_cmd->add_option("--fail-prob", ub.fail_prob);
  ub_cmd->add_option("--noise", ub.noise);
  ub_cmd->add_option("--mode", ub.mode)->check(CLI::IsMember({"generative", "known-transition"}));

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit log2 median trajectories against H");
  fit_cmd->add_option("--records", fit.records)->required();
  fit_cmd->add_option("--learner", fit.learner, "Only use this learner's records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  g.seed_set = app.count("--seed") > 0;

  try {
    if (*gen_cmd) return run_gen(g, gen);
    if (*ver_cmd) return run_verify(g, ver);
    if (*indq_cmd) return run_indq(g, indq);
    if (*sweep_cmd) return run_lb_sweep(g, sweep);
    if (*ub_cmd) return run_ub(g, ub);
    if (*fit_cmd) return run_fit(g, fit);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
