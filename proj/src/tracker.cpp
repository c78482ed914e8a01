#include "diesel/tracker.hpp"

#include <stdexcept>
#include <string>
#include <utility>

#include "diesel/errors.hpp"

namespace diesel {

Tracker::Tracker(const NetworkTopology& topo, TrackerOptions opts,
                 std::vector<Vec> initial_positions)
    : topo_(topo), opts_(std::move(opts)) {
  if (opts_.window_len < 1) throw ConfigError("window_len must be >= 1");
  if (static_cast<int>(initial_positions.size()) != topo_.num_vehicles())
    throw std::invalid_argument("one initial position per vehicle required");
  for (const Vec& p : initial_positions)
    if (p.size() != topo_.dim()) throw std::invalid_argument("initial position dimension");
  window_base_ = initial_positions;
  last_positions_ = std::move(initial_positions);
}

MeasurementWindow Tracker::assemble_window() const {
  const int W = opts_.window_len;
  MeasurementWindow win;
  win.window_len = W;
  win.dt = opts_.dt;
  win.ranges.assign(topo_.num_edges(), std::vector<double>(W));
  win.anchor_ranges.assign(topo_.num_links(), std::vector<double>(W));
  win.rel_velocities.assign(topo_.num_vehicles(), std::vector<Vec>(W));
  win.anchor_base.resize(topo_.num_anchors());
  win.anchor_cum_vel.assign(topo_.num_anchors(), std::vector<Vec>(W));

  for (int tau = 0; tau < W; ++tau) {
    const StreamSample& s = buffer_[tau];
    for (int e = 0; e < topo_.num_edges(); ++e) win.ranges[e][tau] = s.ranges[e];
    for (int l = 0; l < topo_.num_links(); ++l) win.anchor_ranges[l][tau] = s.anchor_ranges[l];
    for (int i = 0; i < topo_.num_vehicles(); ++i) win.rel_velocities[i][tau] = s.velocities[i];
  }
  for (int k = 0; k < topo_.num_anchors(); ++k) {
    win.anchor_base[k] = buffer_.front().anchor_positions[k];
    for (int tau = 0; tau < W; ++tau)
      win.anchor_cum_vel[k][tau] =
          (buffer_[tau].anchor_positions[k] - win.anchor_base[k]) / win.dt;
  }
  return win;
}

StackedVariable Tracker::warm_start(const MeasurementWindow& window,
                                    const WindowDeltas& deltas) const {
  const int W = opts_.window_len;
  StackedVariable z(topo_, W);
  for (int i = 0; i < topo_.num_vehicles(); ++i) z.p(i) = window_base_[i];

  const Vec tie = opts_.solver.resolved_tie_break(topo_.dim());
  // Sphere blocks: shift the previous solution one sample back where it is
  // available, and seed fresh samples from the residual direction at the
  // warm p.
  for (int e = 0; e < topo_.num_edges(); ++e) {
    const Edge& ed = topo_.edge(e);
    for (int tau = 0; tau < W; ++tau) {
      if (have_solution_ && tau + 1 < W) {
        z.y(e, tau) = last_z_.y(e, tau + 1);
      } else {
        const Vec dir = z.p(ed.lo) - z.p(ed.hi) + deltas.dv[e][tau];
        z.y(e, tau) = project_to_sphere(dir, window.ranges[e][tau], tie);
      }
    }
  }
  for (int l = 0; l < topo_.num_links(); ++l) {
    const int i = topo_.links()[l].first;
    for (int tau = 0; tau < W; ++tau) {
      if (have_solution_ && tau + 1 < W) {
        z.w(l, tau) = last_z_.w(l, tau + 1);
      } else {
        const Vec dir = z.p(i) - deltas.alpha[l][tau];
        z.w(l, tau) = project_to_sphere(dir, window.anchor_ranges[l][tau], tie);
      }
    }
  }
  return z;
}

TrackEstimate Tracker::push(const StreamSample& sample) {
  const int W = opts_.window_len;
  const int n = topo_.num_vehicles();

  if (static_cast<int>(sample.ranges.size()) != topo_.num_edges() ||
      static_cast<int>(sample.anchor_ranges.size()) != topo_.num_links() ||
      static_cast<int>(sample.velocities.size()) != n ||
      static_cast<int>(sample.anchor_positions.size()) != topo_.num_anchors())
    throw std::invalid_argument("sample shape does not match topology");

  if (first_push_) {
    expected_tick_ = sample.tick;
    first_push_ = false;
  }
  if (sample.tick < expected_tick_)
    throw ConfigError("stream tick went backwards: " + std::to_string(sample.tick));
  if (sample.tick > expected_tick_) {
    // Gap: the velocity chain is broken, so the window restarts and the last
    // estimate carries over as the (stale) base for the refilled window.
    for (int t = expected_tick_; t < sample.tick; ++t) skipped_.push_back(t);
    buffer_.clear();
    have_solution_ = false;
    window_base_ = last_positions_;
  }
  expected_tick_ = sample.tick + 1;

  if (static_cast<int>(buffer_.size()) == W) {
    // Slide: advance the base estimate by the dropped sample's velocity.
    const StreamSample& dropped = buffer_.front();
    for (int i = 0; i < n; ++i) window_base_[i] += opts_.dt * dropped.velocities[i];
    buffer_.pop_front();
  }
  buffer_.push_back(sample);

  TrackEstimate est;
  est.tick = sample.tick;

  if (static_cast<int>(buffer_.size()) < W) {
    // Window not full yet: dead-reckon from the previous estimate.  The first
    // sample after construction or after a gap has no velocity leading into
    // it, so it re-emits the previous estimate unchanged.
    est.positions = last_positions_;
    if (buffer_.size() > 1)
      for (int i = 0; i < n; ++i) est.positions[i] += opts_.dt * prev_velocities_[i];
    est.solved = false;
  } else {
    const MeasurementWindow window = assemble_window();
    const WindowDeltas deltas = window_deltas(window, topo_);
    const StackedVariable init = warm_start(window, deltas);
    auto [z, report] = run_window(topo_, window, init, opts_.solver, opts_.policy);

    const CumulativeVelocity cum = cumulative_velocities(window, topo_);
    est.positions.resize(n);
    for (int i = 0; i < n; ++i) {
      window_base_[i] = z.p(i);
      est.positions[i] = cum.position(z.p(i), i, W - 1, window.dt);
    }
    est.solved = true;
    est.report = std::move(report);
    last_z_ = std::move(z);
    have_solution_ = true;
  }

  prev_velocities_ = sample.velocities;
  last_positions_ = est.positions;
  return est;
}

TrackResult track(const NetworkTopology& topo, const std::vector<StreamSample>& stream,
                  const TrackerOptions& opts, std::vector<Vec> initial_positions) {
  Tracker tracker(topo, opts, std::move(initial_positions));
  TrackResult result;
  result.estimates.reserve(stream.size());
  for (const StreamSample& s : stream) result.estimates.push_back(tracker.push(s));
  result.skipped_ticks = tracker.skipped_ticks();
  return result;
}

}  // namespace diesel
