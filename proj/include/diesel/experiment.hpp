#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diesel/baselines.hpp"
#include "diesel/metrics.hpp"
#include "diesel/scenario.hpp"

namespace diesel {

struct ScenarioConfig {
  TrajectoryParams trajectory;
  FormationConfig formation;
  NoiseConfig noise;
  int duration_ticks = 300;
  double dt = 1.0;
  // Explicit measurement graph; when absent the formation default (complete
  // free-vehicle graph, all anchor links) is used.
  std::optional<std::vector<std::pair<int, int>>> edges;
  std::optional<std::vector<std::vector<int>>> anchor_links;

  NetworkTopology build_topology() const;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::vector<std::string> methods = {"diesel", "ekf", "static"};
  int t0 = 5;  // diesel window is t0 + 1 samples
  int trials = 100;
  SolverParams solver;
  EkfParams ekf;
  uint64_t base_seed = 1;
  int workers = 0;  // 0: hardware concurrency
  std::string output_dir = "out";

  void validate() const;  // throws ConfigError
};

// JSON round-trip; file flags override defaults field by field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::string& path);

struct TrialMethodResult {
  std::vector<double> per_tick_error;  // mean over free vehicles, m
  double normalized_error = 0.0;       // grand mean over vehicles and ticks
  bool diverged = false;
};

struct ExperimentResult {
  MetricSeries series;
  // raw per-trial results keyed by method, indexed by trial
  std::map<std::string, std::vector<TrialMethodResult>> raw;
  // per-trial initialization draws (the same draw feeds every method)
  std::vector<std::vector<Vec>> trial_inits;
};

// Per-tick mean/std over trials plus per-trial normalized errors.  Diverged
// trials are excluded from every statistic and surface in divergence_count.
MetricSeries aggregate_series(const std::vector<std::string>& methods, int ticks,
                              const std::map<std::string, std::vector<TrialMethodResult>>& raw);

// Full Monte Carlo run: per trial, one seeded scenario + measurement stream
// consumed by every enabled method from the same initialization draw.
// Trials run on a worker pool; aggregation is keyed by trial index, so the
// output is identical for any worker count.  Diverged trials are excluded
// from the means and counted.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Writes mean_error.csv, cdf.csv and summary.json under dir.
void emit_reports(const MetricSeries& series, const std::string& dir,
                  const nlohmann::json& config_echo);

struct EkfTuningRow {
  double q = 0.0;
  double r = 0.0;
  double mean_error = 0.0;
};

struct EkfTuningResult {
  std::vector<EkfTuningRow> rows;
  EkfParams best;
};

// Grid search over (q, r) by overall mean error, EKF only.
EkfTuningResult tune_ekf(const ExperimentConfig& config, const std::vector<double>& q_grid,
                         const std::vector<double>& r_grid, int tuning_trials);

void write_tuning_csv(const EkfTuningResult& tuning, const std::string& path);

// CSV exports of a generated scenario for outside inspection.
void export_ground_truth_csv(const GroundTruth& truth, const std::string& path);
void export_stream_csv(const std::vector<StreamSample>& stream, const NetworkTopology& topo,
                       const std::string& path);

}  // namespace diesel
