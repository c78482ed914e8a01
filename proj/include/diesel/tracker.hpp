#pragma once

#include <deque>
#include <vector>

#include "diesel/solver.hpp"

namespace diesel {

// One tick of measurements.  velocities[i] is the measured water-relative
// velocity carrying vehicle i from this tick to the next; anchor_positions
// are the reported (GPS) anchor locations at this tick.
struct StreamSample {
  int tick = 0;
  std::vector<double> ranges;          // per edge
  std::vector<double> anchor_ranges;   // per link
  std::vector<Vec> velocities;         // per vehicle
  std::vector<Vec> anchor_positions;   // per anchor
};

struct TrackerOptions {
  int window_len = 6;  // W = T0 + 1
  double dt = 1.0;
  SolverParams solver;
  ExecutionPolicy policy = ExecutionPolicy::sequential;
};

struct TrackEstimate {
  int tick = 0;
  std::vector<Vec> positions;  // x_hat_i at this tick
  // True once the sliding window is full and the estimate came out of a
  // window solve; dead-reckoned estimates before that carry solved == false.
  bool solved = false;
  SolveReport report;
};

// Sliding-window tracking loop: accumulates samples, warm-starts each window
// from the previous solution (p advanced by the dropped sample's velocity,
// y/w shifted with the newest blocks projected from the current residual
// directions), solves, and emits absolute position estimates
// x_hat_i(t) = p_hat_i + v_i(t) * dt.
class Tracker {
 public:
  // initial_positions: position guesses for the first stream tick.
  Tracker(const NetworkTopology& topo, TrackerOptions opts,
          std::vector<Vec> initial_positions);

  // Feed the next sample; returns the estimate for that tick.  A jump in the
  // tick index is a stream gap: the missing ticks are recorded, the window
  // restarts, and estimation resumes once it refills.
  TrackEstimate push(const StreamSample& sample);

  const std::vector<int>& skipped_ticks() const { return skipped_; }
  int window_len() const { return opts_.window_len; }

 private:
  MeasurementWindow assemble_window() const;
  StackedVariable warm_start(const MeasurementWindow& window, const WindowDeltas& deltas) const;

  const NetworkTopology& topo_;
  TrackerOptions opts_;

  std::deque<StreamSample> buffer_;
  std::vector<Vec> window_base_;    // position estimate at the window's first tick
  std::vector<Vec> last_positions_; // estimate emitted for the previous tick
  std::vector<Vec> prev_velocities_;
  StackedVariable last_z_;
  bool have_solution_ = false;
  bool first_push_ = true;
  int expected_tick_ = 0;
  std::vector<int> skipped_;
};

struct TrackResult {
  std::vector<TrackEstimate> estimates;
  std::vector<int> skipped_ticks;
};

// Convenience wrapper over Tracker for a fully materialized stream.
TrackResult track(const NetworkTopology& topo, const std::vector<StreamSample>& stream,
                  const TrackerOptions& opts, std::vector<Vec> initial_positions);

}  // namespace diesel
