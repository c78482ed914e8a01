#pragma once

#include <Eigen/Dense>
#include <vector>

#include "diesel/tracker.hpp"

namespace diesel {

// Static range-only localizer: the same projected-gradient machinery run on
// a degenerate single-sample window with all velocity information removed,
// warm-started tick to tick.  Reusing the solver keeps the benchmark about
// the value of velocity/window data, not implementation differences.
class StaticLocalizer {
 public:
  // Throws ConfigError when the topology has no anchor links at all (the
  // problem is translation-unobservable).
  StaticLocalizer(const NetworkTopology& topo, SolverParams solver,
                  std::vector<Vec> initial_positions);

  TrackEstimate push(const StreamSample& sample);

 private:
  Tracker tracker_;
};

struct EkfParams {
  double process_noise = 1e-3;  // q, m^2 added per tick (times dt^2)
  double range_noise = 0.25;    // r, m^2
};

// Centralized extended Kalman filter over the stacked free-vehicle positions.
// Measured relative velocities enter as control inputs in the predict step;
// the unknown current and the velocity noise are absorbed into the process
// noise scale.
class Ekf {
 public:
  Ekf(const NetworkTopology& topo, EkfParams params, const std::vector<Vec>& initial_mean,
      double initial_var);

  // mean_i += dt * v_i, covariance += q * dt^2 * I.
  void predict(const std::vector<Vec>& velocities, double dt);

  // Joint first-order update over every range in the sample.  Measurements
  // whose predicted range is below 1e-9 m have no usable direction and are
  // skipped.  Throws FilterDivergence if the state stops being finite.
  void update(const StreamSample& sample);

  std::vector<Vec> positions() const;
  const Eigen::MatrixXd& covariance() const { return cov_; }

 private:
  const NetworkTopology& topo_;
  EkfParams params_;
  Eigen::VectorXd mean_;  // stacked free-vehicle positions
  Eigen::MatrixXd cov_;
};

}  // namespace diesel
