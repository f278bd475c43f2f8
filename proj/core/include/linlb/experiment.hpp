#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace linlb {

struct ExperimentRecord {
  std::string experiment;
  int H = 0;
  int d = 0;
  double delta = 0.0;
  double margin = 0.0;
  double gamma = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string learner;
  std::uint64_t budget = 0;
  std::uint64_t trajectories_used = 0;
  bool success = false;
  double value_found = 0.0;
  double opt_value = 0.0;

  bool operator==(const ExperimentRecord&) const = default;
};

struct CellError {
  int H = 0;
  std::uint64_t seed = 0;
  std::string learner;  // empty when instance construction or verification failed
  std::string message;
};

/// Learner names: uniform, lsvi (episodic), lsvi-batch, gap, eps, cheat.
/// Instance families: value-lb, policy-lb, onehot.
struct SweepConfig {
  std::string experiment = "lb";
  std::string variant = "value-lb";
  std::string mode = "rl";
  std::vector<int> horizons;
  std::vector<std::string> learners;
  int seeds = 0;
  std::uint64_t base_seed = 0;

  double delta = 0.7;  // JL tolerance for value-lb features
  int budget_offset = 3;  // episode budget 2^{H + offset} for the lower-bound learners
  std::optional<std::uint64_t> budget;  // overrides the offset rule when set
  double lsvi_regularizer = 1e-3;
  double lsvi_samples_factor = 10.0;  // lsvi-batch probes per level, in units of d

  double gamma = 1.0;
  double eps = 0.25;
  double fail_prob = 0.01;
  double noise = 0.0;

  bool verify = true;
  int verify_k = 5;
  int workers = 1;
};

/// Strict parse: unknown keys and out-of-range values raise ConfigError.
SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& c);

struct SweepResult {
  std::vector<ExperimentRecord> records;
  std::vector<CellError> errors;
};

/// Records come back in (H, learner, seed) order, following the order of
/// `horizons` and `learners` in the config, whatever the worker count.
SweepResult run_sweep(const SweepConfig& config);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::pair<int, double>> medians;  // (H, median trajectories)
};

/// Per-H median trajectories-to-success with failures censored at +inf (an H
/// whose median is censored is dropped), then ordinary least squares of
/// log2(median) against H. Needs >= 3 distinct H values with finite medians.
ScalingFit fit_scaling(const std::vector<ExperimentRecord>& records);
/// Same fit on (H, count) points directly.
ScalingFit fit_scaling_points(const std::vector<std::pair<int, double>>& points);

double median(std::vector<double> values);

std::string csv_header();
std::string to_csv_row(const ExperimentRecord& r);
std::string to_csv(const std::vector<ExperimentRecord>& records);
std::string to_jsonl(const std::vector<ExperimentRecord>& records);
/// "H median" lines for gnuplot.
std::string to_gnuplot(const ScalingFit& fit);

}  // namespace linlb
