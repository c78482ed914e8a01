#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "diesel/errors.hpp"
#include "diesel/experiment.hpp"
#include "diesel/rng.hpp"
#include "test_util.hpp"

using namespace diesel;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.scenario.duration_ticks = 40;
  cfg.trials = 4;
  cfg.methods = {"diesel", "ekf", "static"};
  cfg.base_seed = 11;
  return cfg;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

}  // namespace

TEST_CASE("empirical cdf definition") {
  using points = std::vector<std::pair<double, double>>;
  CHECK(empirical_cdf({1, 2, 3}) ==
        points{{1.0, 1.0 / 3.0}, {2.0, 2.0 / 3.0}, {3.0, 1.0}});
  CHECK(empirical_cdf({5, 5, 5}) == points{{5.0, 1.0}});
  CHECK(empirical_cdf({1, 1, 2}) == points{{1.0, 2.0 / 3.0}, {2.0, 1.0}});
  CHECK_THROWS_AS(empirical_cdf({}), std::invalid_argument);

  SUBCASE("nondecreasing and ending at one on random samples") {
    const CounterRng rng(3);
    std::vector<double> samples;
    for (int i = 0; i < 257; ++i) samples.push_back(rng.uniform(1, i));
    const auto cdf = empirical_cdf(samples);
    double prev_f = 0.0, prev_x = -1.0;
    for (const auto& [x, f] : cdf) {
      CHECK(x > prev_x);
      CHECK(f > prev_f);
      prev_x = x;
      prev_f = f;
    }
    CHECK(cdf.back().second == 1.0);
  }
}

TEST_CASE("steady state and settling tick") {
  std::vector<double> series{10, 5, 2, 1.2, 1.0, 1.0, 1.0, 1.0};
  const double steady = steady_state_mean(series);  // last 4 entries
  CHECK(steady == doctest::Approx(1.0));
  CHECK(settling_tick(series, steady) == 3);  // 2 > 1.5 at index 2

  std::vector<double> flat{1, 1, 1, 1};
  CHECK(settling_tick(flat, steady_state_mean(flat)) == 0);
}

TEST_CASE("config json round trip and validation") {
  ExperimentConfig cfg = small_config();
  cfg.scenario.trajectory.kind = TrajectoryKind::helix;
  cfg.scenario.noise.current = diesel_test::vec3(0.1, 0, 0);
  cfg.solver.rel_tol = 1e-7;
  cfg.ekf.process_noise = 3e-3;
  cfg.workers = 2;

  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.scenario.trajectory.kind == TrajectoryKind::helix);
  CHECK(back.scenario.noise.current(0) == 0.1);
  CHECK(back.solver.rel_tol == 1e-7);
  CHECK(back.ekf.process_noise == 3e-3);
  CHECK(back.trials == cfg.trials);
  CHECK(back.workers == 2);

  SUBCASE("bad configs throw ConfigError") {
    ExperimentConfig bad = small_config();
    bad.methods = {"bogus"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = small_config();
    bad.t0 = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = small_config();
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  SUBCASE("explicit topology lists are honored") {
    ExperimentConfig explicit_cfg = small_config();
    explicit_cfg.scenario.edges = std::vector<std::pair<int, int>>{{0, 1}};
    explicit_cfg.scenario.anchor_links = std::vector<std::vector<int>>{{0}, {1}};
    const NetworkTopology topo = explicit_cfg.scenario.build_topology();
    CHECK(topo.num_edges() == 1);
    CHECK(topo.anchor_links(0) == std::vector<int>{0});
    CHECK(topo.anchor_links(1) == std::vector<int>{1});
  }

  SUBCASE("missing config file is an I/O error") {
    CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), IoError);
  }
}

TEST_CASE("single noiseless trial tracks the truth") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  cfg.methods = {"diesel", "static"};
  cfg.scenario.noise.sigma_range = 0.0;
  cfg.scenario.noise.sigma_vel = 0.0;
  cfg.scenario.noise.sigma_init = 0.0;
  // drive the per-tick solves to convergence so the static chain stays exact
  cfg.solver.rel_tol = 1e-12;
  cfg.solver.max_iters = 5000;

  const ExperimentResult result = run_experiment(cfg);
  for (const std::string& m : cfg.methods) {
    for (double e : result.series.mean_error.at(m)) CHECK(e <= 1e-6);
    CHECK(result.series.divergence_count.at(m) == 0);
  }
}

TEST_CASE("experiments are reproducible byte for byte across worker counts") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = small_config();
  const fs::path base = fs::temp_directory_path() / "diesel_harness_test";
  fs::remove_all(base);

  ExperimentConfig cfg1 = cfg;
  cfg1.workers = 1;
  const ExperimentResult r1 = run_experiment(cfg1);
  emit_reports(r1.series, (base / "a").string(), config_to_json(cfg1));

  ExperimentConfig cfg2 = cfg;
  cfg2.workers = 3;
  const ExperimentResult r2 = run_experiment(cfg2);
  emit_reports(r2.series, (base / "b").string(), config_to_json(cfg1));

  for (const std::string name : {"mean_error.csv", "cdf.csv", "summary.json"})
    CHECK(read_file((base / "a" / name).string()) == read_file((base / "b" / name).string()));

  SUBCASE("every method consumed the identical initialization draw") {
    REQUIRE(r1.trial_inits.size() == r2.trial_inits.size());
    for (size_t t = 0; t < r1.trial_inits.size(); ++t)
      for (size_t i = 0; i < r1.trial_inits[t].size(); ++i)
        CHECK(diesel_test::bitwise_equal(r1.trial_inits[t][i], r2.trial_inits[t][i]));
  }
  fs::remove_all(base);
}

TEST_CASE("report files have the documented shapes") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "diesel_report_test";
  fs::remove_all(base);

  SUBCASE("empty method list emits header-only CSVs") {
    MetricSeries series;
    series.ticks = 0;
    emit_reports(series, base.string(), nlohmann::json::object());
    CHECK(read_file((base / "mean_error.csv").string()) == "tick,method,mean,std\n");
    CHECK(read_file((base / "cdf.csv").string()) == "method,error,fraction\n");
  }

  SUBCASE("one method and three ticks gives three data rows") {
    std::map<std::string, std::vector<TrialMethodResult>> raw;
    raw["diesel"] = {TrialMethodResult{{1.0, 0.5, 0.25}, 0.5833, false}};
    const MetricSeries series = aggregate_series({"diesel"}, 3, raw);
    emit_reports(series, base.string(), nlohmann::json::object());
    CHECK(count_lines(read_file((base / "mean_error.csv").string())) == 4);  // header + 3
  }

  SUBCASE("summary steady-state mean is recomputable from the mean series") {
    std::map<std::string, std::vector<TrialMethodResult>> raw;
    raw["diesel"] = {TrialMethodResult{{4.0, 2.0, 1.0, 0.8}, 1.95, false}};
    const MetricSeries series = aggregate_series({"diesel"}, 4, raw);
    emit_reports(series, base.string(), nlohmann::json::object());
    const auto summary = nlohmann::json::parse(read_file((base / "summary.json").string()));
    CHECK(summary["methods"]["diesel"]["steady_state_mean_error"].get<double>() ==
          doctest::Approx(0.9));
  }

  SUBCASE("unwritable directory raises IoError with the path") {
    MetricSeries series;
    CHECK_THROWS_AS(emit_reports(series, "/proc/nope/out", nlohmann::json::object()),
                    IoError);
  }
  fs::remove_all(base);
}

TEST_CASE("diverged trials are excluded and counted, never silently dropped") {
  std::map<std::string, std::vector<TrialMethodResult>> raw;
  raw["ekf"] = {TrialMethodResult{{1.0, 1.0}, 1.0, false},
                TrialMethodResult{{}, 0.0, true},
                TrialMethodResult{{3.0, 3.0}, 3.0, false}};
  const MetricSeries series = aggregate_series({"ekf"}, 2, raw);
  CHECK(series.divergence_count.at("ekf") == 1);
  CHECK(series.trials_used.at("ekf") == 2);
  CHECK(series.mean_error.at("ekf")[0] == doctest::Approx(2.0));
  CHECK(series.trial_errors.at("ekf") == std::vector<double>{1.0, 3.0});
}

TEST_CASE("tracker reports stream gaps and recovers") {
  FormationConfig formation;
  TrajectoryParams params;
  const NetworkTopology topo = formation_topology(formation, 2);
  const GroundTruth truth = generate_trajectory(params, formation, 30, 1.0, zero_vec(2));
  NoiseConfig noise;
  noise.sigma_range = 0.0;
  noise.sigma_vel = 0.0;
  const auto stream = synthesize_measurements(truth, topo, formation, noise);
  const auto free = formation.free_slots();

  std::vector<Vec> init;
  for (int slot : free) init.push_back(truth.position(slot, 0));

  TrackerOptions opts;
  opts.window_len = 4;
  opts.solver.rel_tol = 1e-12;
  opts.solver.max_iters = 5000;
  Tracker tracker(topo, opts, init);
  std::vector<TrackEstimate> estimates;
  for (int t = 0; t < 30; ++t) {
    if (t >= 10 && t < 13) continue;  // drop three ticks
    estimates.push_back(tracker.push(stream[t]));
  }
  CHECK(tracker.skipped_ticks() == std::vector<int>{10, 11, 12});

  // solved estimates resume once the window refills, and stay exact
  const TrackEstimate& resumed = estimates.back();
  CHECK(resumed.solved);
  for (size_t i = 0; i < free.size(); ++i)
    CHECK((resumed.positions[i] - truth.position(free[i], resumed.tick)).norm() <= 1e-6);
}

TEST_CASE("scenario streams and truth export to csv") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "diesel_export_test";
  fs::remove_all(base);
  fs::create_directories(base);

  FormationConfig formation;
  TrajectoryParams params;
  const NetworkTopology topo = formation_topology(formation, 2);
  const GroundTruth truth = generate_trajectory(params, formation, 5, 1.0, zero_vec(2));
  NoiseConfig noise;
  const auto stream = synthesize_measurements(truth, topo, formation, noise);

  export_ground_truth_csv(truth, (base / "truth.csv").string());
  export_stream_csv(stream, topo, (base / "stream.csv").string());
  CHECK(count_lines(read_file((base / "truth.csv").string())) == 1 + 5 * 4 * 2);
  // per tick: 1 edge + 4 anchor ranges + 2 vehicles * 2 axes + 2 anchors * 2 axes
  CHECK(count_lines(read_file((base / "stream.csv").string())) == 1 + 5 * (1 + 4 + 4 + 4));
  fs::remove_all(base);
}

TEST_CASE("static vehicles with zero noise hold a constant estimate") {
  GroundTruth still;
  still.dt = 1.0;
  still.current = diesel::zero_vec(2);
  const int ticks = 25;
  still.drift_free = {std::vector<Vec>(ticks, diesel_test::vec2(0, 0)),
                      std::vector<Vec>(ticks, diesel_test::vec2(10, 0)),
                      std::vector<Vec>(ticks, diesel_test::vec2(5, 8))};
  still.rel_velocities.assign(3, std::vector<Vec>(ticks, diesel::zero_vec(2)));

  FormationConfig formation;
  formation.lateral_offsets = {0.0, 1.0, 2.0};
  formation.along_track_offsets = {0.0, 0.0, 0.0};
  formation.anchor_slots = {1, 2};
  const NetworkTopology topo = formation_topology(formation, 2);

  NoiseConfig noise;
  noise.sigma_range = 0.0;
  noise.sigma_vel = 0.0;
  const auto stream = synthesize_measurements(still, topo, formation, noise);

  TrackerOptions opts;
  opts.window_len = 4;
  Tracker tracker(topo, opts, {diesel_test::vec2(0, 0)});
  for (int t = 0; t < ticks; ++t) {
    const TrackEstimate est = tracker.push(stream[t]);
    CHECK((est.positions[0] - diesel_test::vec2(0, 0)).norm() <= 1e-9);
  }
}

TEST_CASE("warm starts beat cold starts on at least 90% of seeded trials") {
  TrajectoryParams params;
  FormationConfig formation;
  const NetworkTopology topo = formation_topology(formation, 2);
  const GroundTruth truth = generate_trajectory(params, formation, 12, 1.0, zero_vec(2));
  const std::vector<int> free = formation.free_slots();

  int wins = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    NoiseConfig noise;
    noise.seed = 9000 + trial;
    const auto stream = synthesize_measurements(truth, topo, formation, noise);
    const auto init = draw_initial_positions(truth, formation, noise);

    // warm route: track normally and take the second solved window's report
    TrackerOptions opts;
    opts.window_len = 6;
    Tracker warm(topo, opts, init);
    int warm_iters = -1;
    for (int t = 0; t < 7; ++t) {
      const TrackEstimate est = warm.push(stream[t]);
      if (t == 6) warm_iters = est.report.iterations;
    }

    // cold route: the same window solved from a fresh random perturbation
    const MeasurementWindow window = [&] {
      MeasurementWindow win;
      win.window_len = 6;
      win.dt = 1.0;
      win.ranges.assign(topo.num_edges(), std::vector<double>(6));
      win.anchor_ranges.assign(topo.num_links(), std::vector<double>(6));
      win.rel_velocities.assign(topo.num_vehicles(), std::vector<Vec>(6));
      win.anchor_base.resize(topo.num_anchors());
      win.anchor_cum_vel.assign(topo.num_anchors(), std::vector<Vec>(6));
      for (int tau = 0; tau < 6; ++tau) {
        const StreamSample& s = stream[1 + tau];
        for (int e = 0; e < topo.num_edges(); ++e) win.ranges[e][tau] = s.ranges[e];
        for (int l = 0; l < topo.num_links(); ++l)
          win.anchor_ranges[l][tau] = s.anchor_ranges[l];
        for (int i = 0; i < topo.num_vehicles(); ++i)
          win.rel_velocities[i][tau] = s.velocities[i];
      }
      for (int k = 0; k < topo.num_anchors(); ++k) {
        win.anchor_base[k] = stream[1].anchor_positions[k];
        for (int tau = 0; tau < 6; ++tau)
          win.anchor_cum_vel[k][tau] =
              (stream[1 + tau].anchor_positions[k] - win.anchor_base[k]) / 1.0;
      }
      return win;
    }();

    const CounterRng rng(500 + trial);
    StackedVariable cold_init(topo, 6);
    for (int i = 0; i < topo.num_vehicles(); ++i) {
      Vec p = truth.position(free[i], 1);
      for (int r = 0; r < 2; ++r) p(r) += 2.0 * rng.gaussian(1, i, r);
      cold_init.p(i) = p;
    }
    SolverParams sp;
    auto [z, cold_report] = run_window(topo, window, cold_init, sp);

    if (warm_iters <= cold_report.iterations) ++wins;
  }
  CHECK(wins >= 18);  // 90% of 20
}
