#pragma once

#include <vector>

#include "diesel/geometry.hpp"

namespace diesel {

// All measurements of one sliding window of W = T0 + 1 samples, indexed
// tau in {0, ..., W-1} with tau = 0 the oldest sample.  Range values are
// stored once per unordered pair, so d_ij == d_ji by construction.  Anchor
// tracks are kept decomposed as a_k(tau) = base + cum_velocity(tau) * dt.
struct MeasurementWindow {
  int window_len = 0;  // W
  double dt = 1.0;

  std::vector<std::vector<double>> ranges;         // [edge][tau], meters
  std::vector<std::vector<double>> anchor_ranges;  // [link][tau], meters
  std::vector<std::vector<Vec>> rel_velocities;    // [vehicle][tau], m/s (measured v^R)
  std::vector<Vec> anchor_base;                    // [anchor] q_k, meters
  std::vector<std::vector<Vec>> anchor_cum_vel;    // [anchor][tau] u_k, m/s

  Vec anchor_position(int anchor, int tau) const {
    return anchor_base[anchor] + anchor_cum_vel[anchor][tau] * dt;
  }

  // Shape and finiteness checks against a topology; throws std::invalid_argument.
  void validate(const NetworkTopology& topo) const;
};

// Running sum of measured relative velocities, anchored so that the first
// window sample carries the zero vector: v_i(0) = 0 and
// v_i(tau+1) = v_i(tau) + v_i^R(tau).  The reconstructed relative position is
// x_i(tau) = p_i + v_i(tau) * dt.
struct CumulativeVelocity {
  std::vector<std::vector<Vec>> v;  // [vehicle][tau], m/s

  Vec position(const Vec& p, int vehicle, int tau, double dt) const {
    return p + v[vehicle][tau] * dt;
  }
};

// Per-sample constants of the stacked quadratic cost.  dv is stored in the
// canonical lo-hi edge orientation, so dv_ij = -dv_ji holds exactly.
struct WindowDeltas {
  std::vector<std::vector<Vec>> dv;     // [edge][tau], (v_lo - v_hi) * dt, meters
  std::vector<std::vector<Vec>> alpha;  // [link][tau], q_k - (v_i - u_k) * dt, meters
};

// The optimization variable z = (p, y, w) over one window, stored flat:
//   p_i            at  i * d
//   y_e(tau)       at  n*d + (e*W + tau) * d
//   w_l(tau)       at  n*d + E*W*d + (l*W + tau) * d
// y blocks are kept in the canonical lo-hi edge orientation.
class StackedVariable {
 public:
  StackedVariable() = default;
  StackedVariable(const NetworkTopology& topo, int window_len);

  int dim() const { return d_; }
  int window_len() const { return W_; }
  int size() const { return static_cast<int>(flat_.size()); }

  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }

  Eigen::VectorBlock<Eigen::VectorXd> p(int vehicle) {
    return flat_.segment(vehicle * d_, d_);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> p(int vehicle) const {
    return flat_.segment(vehicle * d_, d_);
  }
  Eigen::VectorBlock<Eigen::VectorXd> y(int edge, int tau) {
    return flat_.segment(y_offset_ + (edge * W_ + tau) * d_, d_);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> y(int edge, int tau) const {
    return flat_.segment(y_offset_ + (edge * W_ + tau) * d_, d_);
  }
  Eigen::VectorBlock<Eigen::VectorXd> w(int link, int tau) {
    return flat_.segment(w_offset_ + (link * W_ + tau) * d_, d_);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> w(int link, int tau) const {
    return flat_.segment(w_offset_ + (link * W_ + tau) * d_, d_);
  }

  int num_vehicles() const { return n_; }
  int num_edges() const { return num_edges_; }
  int num_links() const { return num_links_; }

  bool all_finite() const { return flat_.allFinite(); }

  // Same layout, all entries zero.
  StackedVariable zeros_like() const;

 private:
  int d_ = 0;
  int W_ = 0;
  int n_ = 0;
  int num_edges_ = 0;
  int num_links_ = 0;
  int y_offset_ = 0;
  int w_offset_ = 0;
  Eigen::VectorXd flat_;
};

// Running cumulative velocities for every vehicle (exclusive sum; see
// CumulativeVelocity).
CumulativeVelocity cumulative_velocities(const MeasurementWindow& window,
                                         const NetworkTopology& topo);

// dv and alpha constants for one window.
WindowDeltas window_deltas(const MeasurementWindow& window, const NetworkTopology& topo);

}  // namespace diesel
