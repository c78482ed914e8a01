#include "diesel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "diesel/errors.hpp"

namespace diesel {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TrajectoryKind kind_from_string(const std::string& s) {
  if (s == "lap") return TrajectoryKind::lap;
  if (s == "lawnmower") return TrajectoryKind::lawnmower;
  if (s == "helix") return TrajectoryKind::helix;
  throw ConfigError("unknown trajectory kind '" + s + "'");
}

std::string kind_to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::lap: return "lap";
    case TrajectoryKind::lawnmower: return "lawnmower";
    case TrajectoryKind::helix: return "helix";
  }
  return "?";
}

Vec vec_from_json(const json& j) {
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

}  // namespace

NetworkTopology ScenarioConfig::build_topology() const {
  const int dim = trajectory_dim(trajectory.kind);
  if (!edges && !anchor_links) return formation_topology(formation, dim);

  const int n = static_cast<int>(formation.free_slots().size());
  const int m = static_cast<int>(formation.anchor_slots.size());
  std::vector<std::pair<int, int>> edge_list;
  if (edges) {
    edge_list = *edges;
  } else {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) edge_list.emplace_back(a, b);
  }
  std::vector<std::vector<int>> link_list(n);
  if (anchor_links) {
    if (static_cast<int>(anchor_links->size()) != n)
      throw ConfigError("anchor_links must list one entry per free vehicle");
    link_list = *anchor_links;
  } else {
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < m; ++k) link_list[i].push_back(k);
  }
  try {
    return NetworkTopology(dim, n, m, edge_list, link_list);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid topology: ") + e.what());
  }
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (scenario.duration_ticks < 1) throw ConfigError("duration_ticks must be >= 1");
  if (scenario.dt <= 0) throw ConfigError("dt must be positive");
  if (solver.max_iters < 1) throw ConfigError("solver.max_iters must be >= 1");
  if (solver.rel_tol <= 0) throw ConfigError("solver.rel_tol must be positive");
  if (ekf.process_noise <= 0 || ekf.range_noise <= 0)
    throw ConfigError("EKF noise scales must be positive");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  for (const std::string& m : methods) {
    if (m != "diesel" && m != "ekf" && m != "static")
      throw ConfigError("unknown method '" + m + "'");
    if (m == "diesel" && t0 < 1) throw ConfigError("t0 must be >= 1 for diesel");
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    if (s.contains("trajectory")) {
      const json& t = s.at("trajectory");
      TrajectoryParams& p = cfg.scenario.trajectory;
      if (t.contains("kind")) p.kind = kind_from_string(t.at("kind").get<std::string>());
      p.speed = t.value("speed", p.speed);
      p.leg_length = t.value("leg_length", p.leg_length);
      p.lap_radius = t.value("lap_radius", p.lap_radius);
      p.leg_spacing = t.value("leg_spacing", p.leg_spacing);
      p.helix_radius = t.value("helix_radius", p.helix_radius);
      p.descent_rate = t.value("descent_rate", p.descent_rate);
    }
    if (s.contains("formation")) {
      const json& f = s.at("formation");
      if (f.contains("lateral_offsets")) {
        cfg.scenario.formation.lateral_offsets =
            f.at("lateral_offsets").get<std::vector<double>>();
        // stagger must be given explicitly once the slot count changes
        cfg.scenario.formation.along_track_offsets.assign(
            cfg.scenario.formation.lateral_offsets.size(), 0.0);
      }
      if (f.contains("along_track_offsets"))
        cfg.scenario.formation.along_track_offsets =
            f.at("along_track_offsets").get<std::vector<double>>();
      if (f.contains("anchor_slots"))
        cfg.scenario.formation.anchor_slots = f.at("anchor_slots").get<std::vector<int>>();
    }
    if (s.contains("noise")) {
      const json& nz = s.at("noise");
      NoiseConfig& n = cfg.scenario.noise;
      n.sigma_range = nz.value("sigma_range", n.sigma_range);
      n.sigma_vel = nz.value("sigma_vel", n.sigma_vel);
      n.sigma_init = nz.value("sigma_init", n.sigma_init);
      if (nz.contains("current")) n.current = vec_from_json(nz.at("current"));
    }
    cfg.scenario.duration_ticks = s.value("duration_ticks", cfg.scenario.duration_ticks);
    cfg.scenario.dt = s.value("dt", cfg.scenario.dt);
    if (s.contains("edges")) {
      std::vector<std::pair<int, int>> edges;
      for (const json& e : s.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      cfg.scenario.edges = std::move(edges);
    }
    if (s.contains("anchor_links"))
      cfg.scenario.anchor_links = s.at("anchor_links").get<std::vector<std::vector<int>>>();
  }
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
  cfg.t0 = j.value("t0", cfg.t0);
  cfg.trials = j.value("trials", cfg.trials);
  if (j.contains("solver")) {
    const json& sv = j.at("solver");
    cfg.solver.max_iters = sv.value("max_iters", cfg.solver.max_iters);
    cfg.solver.rel_tol = sv.value("rel_tol", cfg.solver.rel_tol);
    cfg.solver.lipschitz = sv.value("lipschitz", cfg.solver.lipschitz);
  }
  if (j.contains("ekf")) {
    const json& ek = j.at("ekf");
    cfg.ekf.process_noise = ek.value("q", cfg.ekf.process_noise);
    cfg.ekf.range_noise = ek.value("r", cfg.ekf.range_noise);
  }
  cfg.base_seed = j.value("base_seed", cfg.base_seed);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json t{{"kind", kind_to_string(cfg.scenario.trajectory.kind)},
         {"speed", cfg.scenario.trajectory.speed},
         {"leg_length", cfg.scenario.trajectory.leg_length},
         {"lap_radius", cfg.scenario.trajectory.lap_radius},
         {"leg_spacing", cfg.scenario.trajectory.leg_spacing},
         {"helix_radius", cfg.scenario.trajectory.helix_radius},
         {"descent_rate", cfg.scenario.trajectory.descent_rate}};
  json f{{"lateral_offsets", cfg.scenario.formation.lateral_offsets},
         {"along_track_offsets", cfg.scenario.formation.along_track_offsets},
         {"anchor_slots", cfg.scenario.formation.anchor_slots}};
  const int dim = trajectory_dim(cfg.scenario.trajectory.kind);
  json nz{{"sigma_range", cfg.scenario.noise.sigma_range},
          {"sigma_vel", cfg.scenario.noise.sigma_vel},
          {"sigma_init", cfg.scenario.noise.sigma_init},
          {"current", vec_to_json(cfg.scenario.noise.resolved_current(dim))}};
  json scenario{{"trajectory", t},
                {"formation", f},
                {"noise", nz},
                {"duration_ticks", cfg.scenario.duration_ticks},
                {"dt", cfg.scenario.dt}};
  if (cfg.scenario.edges) {
    json edges = json::array();
    for (const auto& [a, b] : *cfg.scenario.edges) edges.push_back(json::array({a, b}));
    scenario["edges"] = edges;
  }
  if (cfg.scenario.anchor_links) scenario["anchor_links"] = *cfg.scenario.anchor_links;

  return json{{"scenario", scenario},
              {"methods", cfg.methods},
              {"t0", cfg.t0},
              {"trials", cfg.trials},
              {"solver",
               {{"max_iters", cfg.solver.max_iters},
                {"rel_tol", cfg.solver.rel_tol},
                {"lipschitz", cfg.solver.lipschitz}}},
              {"ekf", {{"q", cfg.ekf.process_noise}, {"r", cfg.ekf.range_noise}}},
              {"base_seed", cfg.base_seed},
              {"workers", cfg.workers},
              {"output_dir", cfg.output_dir}};
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

namespace {

struct TrialOutput {
  std::map<std::string, TrialMethodResult> methods;
  std::vector<Vec> init;
};

double mean_vehicle_error(const std::vector<Vec>& estimates, const GroundTruth& truth,
                          const std::vector<int>& free_slots, int tick) {
  double sum = 0.0;
  for (size_t i = 0; i < estimates.size(); ++i)
    sum += (estimates[i] - truth.position(free_slots[i], tick)).norm();
  return sum / static_cast<double>(estimates.size());
}

TrialOutput run_single_trial(const ExperimentConfig& cfg, const NetworkTopology& topo,
                             const GroundTruth& truth, int trial) {
  NoiseConfig noise = cfg.scenario.noise;
  noise.seed = cfg.base_seed + static_cast<uint64_t>(trial);

  const std::vector<StreamSample> stream =
      synthesize_measurements(truth, topo, cfg.scenario.formation, noise);
  const std::vector<int> free_slots = cfg.scenario.formation.free_slots();
  const int ticks = truth.ticks();

  TrialOutput out;
  out.init = draw_initial_positions(truth, cfg.scenario.formation, noise);

  for (const std::string& method : cfg.methods) {
    TrialMethodResult res;
    res.per_tick_error.assign(ticks, std::numeric_limits<double>::quiet_NaN());
    try {
      if (method == "diesel") {
        TrackerOptions opts;
        opts.window_len = cfg.t0 + 1;
        opts.dt = cfg.scenario.dt;
        opts.solver = cfg.solver;
        Tracker tracker(topo, opts, out.init);
        for (int t = 0; t < ticks; ++t) {
          const TrackEstimate est = tracker.push(stream[t]);
          res.per_tick_error[t] = mean_vehicle_error(est.positions, truth, free_slots, t);
        }
      } else if (method == "static") {
        StaticLocalizer localizer(topo, cfg.solver, out.init);
        for (int t = 0; t < ticks; ++t) {
          const TrackEstimate est = localizer.push(stream[t]);
          res.per_tick_error[t] = mean_vehicle_error(est.positions, truth, free_slots, t);
        }
      } else {  // ekf
        Ekf ekf(topo, cfg.ekf, out.init,
                cfg.scenario.noise.sigma_init * cfg.scenario.noise.sigma_init);
        for (int t = 0; t < ticks; ++t) {
          if (t > 0) ekf.predict(stream[t - 1].velocities, cfg.scenario.dt);
          ekf.update(stream[t]);
          res.per_tick_error[t] = mean_vehicle_error(ekf.positions(), truth, free_slots, t);
        }
      }
      double sum = 0.0;
      for (double e : res.per_tick_error) sum += e;
      res.normalized_error = sum / static_cast<double>(ticks);
    } catch (const NumericalFault&) {
      res.diverged = true;
    } catch (const FilterDivergence&) {
      res.diverged = true;
    }
    out.methods.emplace(method, std::move(res));
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const NetworkTopology topo = cfg.scenario.build_topology();
  const int dim = trajectory_dim(cfg.scenario.trajectory.kind);
  const GroundTruth truth = generate_trajectory(
      cfg.scenario.trajectory, cfg.scenario.formation, cfg.scenario.duration_ticks,
      cfg.scenario.dt, cfg.scenario.noise.resolved_current(dim));

  std::vector<TrialOutput> outputs(cfg.trials);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const int trial = next.fetch_add(1);
      if (trial >= cfg.trials) return;
      try {
        outputs[trial] = run_single_trial(cfg, topo, truth, trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  int workers = cfg.workers > 0 ? cfg.workers
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, cfg.trials);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  for (auto& out : outputs) result.trial_inits.push_back(out.init);
  for (const std::string& method : cfg.methods) {
    auto& raw = result.raw[method];
    raw.reserve(cfg.trials);
    for (auto& out : outputs) raw.push_back(out.methods.at(method));
  }
  result.series = aggregate_series(cfg.methods, truth.ticks(), result.raw);
  return result;
}

MetricSeries aggregate_series(const std::vector<std::string>& methods, int ticks,
                              const std::map<std::string, std::vector<TrialMethodResult>>& raw) {
  MetricSeries series;
  series.methods = methods;
  series.ticks = ticks;

  for (const std::string& method : methods) {
    const auto& results = raw.at(method);
    int used = 0;
    for (const auto& r : results)
      if (!r.diverged) ++used;
    series.divergence_count[method] = static_cast<int>(results.size()) - used;
    series.trials_used[method] = used;

    std::vector<double>& mean = series.mean_error[method];
    std::vector<double>& stdev = series.std_error[method];
    mean.assign(ticks, 0.0);
    stdev.assign(ticks, 0.0);
    for (int t = 0; t < ticks; ++t) {
      double sum = 0.0;
      for (const auto& r : results)
        if (!r.diverged) sum += r.per_tick_error[t];
      const double mu = used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
      mean[t] = mu;
      double ss = 0.0;
      for (const auto& r : results)
        if (!r.diverged) ss += (r.per_tick_error[t] - mu) * (r.per_tick_error[t] - mu);
      stdev[t] = used > 1 ? std::sqrt(ss / (used - 1)) : 0.0;
    }

    std::vector<double>& trial_errors = series.trial_errors[method];
    for (const auto& r : results)
      if (!r.diverged) trial_errors.push_back(r.normalized_error);
  }
  return series;
}

void emit_reports(const MetricSeries& series, const std::string& dir,
                  const json& config_echo) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

  {
    const std::string path = dir + "/mean_error.csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "tick,method,mean,std\n";
    for (int t = 0; t < series.ticks; ++t)
      for (const std::string& m : series.methods)
        out << t << ',' << m << ',' << fmt(series.mean_error.at(m)[t]) << ','
            << fmt(series.std_error.at(m)[t]) << '\n';
    if (!out) throw IoError("write failure on " + path);
  }

  {
    const std::string path = dir + "/cdf.csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "method,error,fraction\n";
    for (const std::string& m : series.methods) {
      const auto& samples = series.trial_errors.at(m);
      if (samples.empty()) continue;
      for (const auto& [value, fraction] : empirical_cdf(samples))
        out << m << ',' << fmt(value) << ',' << fmt(fraction) << '\n';
    }
    if (!out) throw IoError("write failure on " + path);
  }

  {
    json methods = json::object();
    for (const std::string& m : series.methods) {
      const auto& mean = series.mean_error.at(m);
      json entry;
      if (!mean.empty() && series.trials_used.at(m) > 0) {
        const double steady = steady_state_mean(mean);
        entry["steady_state_mean_error"] = steady;
        entry["settling_tick"] = settling_tick(mean, steady);
      }
      entry["divergence_count"] = series.divergence_count.at(m);
      entry["trials_used"] = series.trials_used.at(m);
      methods[m] = entry;
    }
    const json summary{{"config", config_echo}, {"methods", methods}};
    const std::string path = dir + "/summary.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << summary.dump(2) << '\n';
    if (!out) throw IoError("write failure on " + path);
  }
}

EkfTuningResult tune_ekf(const ExperimentConfig& config, const std::vector<double>& q_grid,
                         const std::vector<double>& r_grid, int tuning_trials) {
  if (q_grid.empty() || r_grid.empty()) throw ConfigError("empty EKF tuning grid");
  ExperimentConfig cfg = config;
  cfg.methods = {"ekf"};
  cfg.trials = tuning_trials;

  EkfTuningResult tuning;
  double best = std::numeric_limits<double>::infinity();
  for (double q : q_grid) {
    for (double r : r_grid) {
      cfg.ekf.process_noise = q;
      cfg.ekf.range_noise = r;
      const ExperimentResult res = run_experiment(cfg);
      const auto& samples = res.series.trial_errors.at("ekf");
      double mean = std::numeric_limits<double>::infinity();
      if (!samples.empty()) {
        mean = 0.0;
        for (double e : samples) mean += e;
        mean /= static_cast<double>(samples.size());
      }
      tuning.rows.push_back({q, r, mean});
      if (mean < best) {
        best = mean;
        tuning.best = EkfParams{q, r};
      }
    }
  }
  return tuning;
}

void write_tuning_csv(const EkfTuningResult& tuning, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "q,r,mean_error\n";
  for (const auto& row : tuning.rows)
    out << fmt(row.q) << ',' << fmt(row.r) << ',' << fmt(row.mean_error) << '\n';
  if (!out) throw IoError("write failure on " + path);
}

void export_ground_truth_csv(const GroundTruth& truth, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "tick,slot,axis,position,rel_velocity\n";
  for (int t = 0; t < truth.ticks(); ++t)
    for (int s = 0; s < truth.num_slots(); ++s) {
      const Vec pos = truth.position(s, t);
      for (int r = 0; r < truth.dim(); ++r)
        out << t << ',' << s << ',' << r << ',' << fmt(pos(r)) << ','
            << fmt(truth.rel_velocities[s][t](r)) << '\n';
    }
  if (!out) throw IoError("write failure on " + path);
}

void export_stream_csv(const std::vector<StreamSample>& stream, const NetworkTopology& topo,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "tick,kind,a,b,value\n";
  for (const StreamSample& s : stream) {
    for (int e = 0; e < topo.num_edges(); ++e)
      out << s.tick << ",range," << topo.edge(e).lo << ',' << topo.edge(e).hi << ','
          << fmt(s.ranges[e]) << '\n';
    for (int l = 0; l < topo.num_links(); ++l)
      out << s.tick << ",anchor_range," << topo.links()[l].first << ','
          << topo.links()[l].second << ',' << fmt(s.anchor_ranges[l]) << '\n';
    for (int i = 0; i < topo.num_vehicles(); ++i)
      for (int r = 0; r < topo.dim(); ++r)
        out << s.tick << ",velocity," << i << ',' << r << ',' << fmt(s.velocities[i](r))
            << '\n';
    for (int k = 0; k < topo.num_anchors(); ++k)
      for (int r = 0; r < topo.dim(); ++r)
        out << s.tick << ",anchor_position," << k << ',' << r << ','
            << fmt(s.anchor_positions[k](r)) << '\n';
  }
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace diesel
