#include "diesel/window.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace diesel {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("malformed window: " + what);
}

}  // namespace

void MeasurementWindow::validate(const NetworkTopology& topo) const {
  require(window_len >= 1, "window_len must be >= 1");
  require(dt > 0 && std::isfinite(dt), "dt must be positive");
  require(static_cast<int>(ranges.size()) == topo.num_edges(), "one range row per edge");
  require(static_cast<int>(anchor_ranges.size()) == topo.num_links(),
          "one range row per anchor link");
  require(static_cast<int>(rel_velocities.size()) == topo.num_vehicles(),
          "one velocity row per vehicle");
  require(static_cast<int>(anchor_base.size()) == topo.num_anchors(), "one base per anchor");
  require(static_cast<int>(anchor_cum_vel.size()) == topo.num_anchors(),
          "one velocity row per anchor");

  for (const auto& row : ranges) {
    require(static_cast<int>(row.size()) == window_len, "edge range row length");
    for (double r : row) require(r >= 0 && std::isfinite(r), "ranges must be finite and >= 0");
  }
  for (const auto& row : anchor_ranges) {
    require(static_cast<int>(row.size()) == window_len, "anchor range row length");
    for (double r : row) require(r >= 0 && std::isfinite(r), "ranges must be finite and >= 0");
  }
  for (const auto& row : rel_velocities) {
    require(static_cast<int>(row.size()) == window_len, "velocity row length");
    for (const Vec& v : row)
      require(v.size() == topo.dim() && v.allFinite(), "velocity shape/finiteness");
  }
  for (int k = 0; k < topo.num_anchors(); ++k) {
    require(anchor_base[k].size() == topo.dim() && anchor_base[k].allFinite(), "anchor base");
    require(static_cast<int>(anchor_cum_vel[k].size()) == window_len, "anchor track length");
    for (const Vec& u : anchor_cum_vel[k])
      require(u.size() == topo.dim() && u.allFinite(), "anchor velocity shape");
  }
}

StackedVariable::StackedVariable(const NetworkTopology& topo, int window_len)
    : d_(topo.dim()),
      W_(window_len),
      n_(topo.num_vehicles()),
      num_edges_(topo.num_edges()),
      num_links_(topo.num_links()) {
  if (window_len < 1) throw std::invalid_argument("window_len must be >= 1");
  y_offset_ = n_ * d_;
  w_offset_ = y_offset_ + num_edges_ * W_ * d_;
  flat_ = Eigen::VectorXd::Zero(w_offset_ + num_links_ * W_ * d_);
}

StackedVariable StackedVariable::zeros_like() const {
  StackedVariable z = *this;
  z.flat_.setZero();
  return z;
}

CumulativeVelocity cumulative_velocities(const MeasurementWindow& window,
                                         const NetworkTopology& topo) {
  const int W = window.window_len;
  CumulativeVelocity cum;
  cum.v.resize(topo.num_vehicles());
  for (int i = 0; i < topo.num_vehicles(); ++i) {
    cum.v[i].resize(W);
    cum.v[i][0] = zero_vec(topo.dim());
    for (int tau = 1; tau < W; ++tau)
      cum.v[i][tau] = cum.v[i][tau - 1] + window.rel_velocities[i][tau - 1];
  }
  return cum;
}

WindowDeltas window_deltas(const MeasurementWindow& window, const NetworkTopology& topo) {
  const CumulativeVelocity cum = cumulative_velocities(window, topo);
  const int W = window.window_len;
  WindowDeltas deltas;

  deltas.dv.resize(topo.num_edges());
  for (int e = 0; e < topo.num_edges(); ++e) {
    const Edge& ed = topo.edge(e);
    deltas.dv[e].resize(W);
    for (int tau = 0; tau < W; ++tau)
      deltas.dv[e][tau] = (cum.v[ed.lo][tau] - cum.v[ed.hi][tau]) * window.dt;
  }

  deltas.alpha.resize(topo.num_links());
  for (int l = 0; l < topo.num_links(); ++l) {
    const auto& [i, k] = topo.links()[l];
    deltas.alpha[l].resize(W);
    for (int tau = 0; tau < W; ++tau)
      deltas.alpha[l][tau] =
          window.anchor_base[k] - (cum.v[i][tau] - window.anchor_cum_vel[k][tau]) * window.dt;
  }

  return deltas;
}

}  // namespace diesel
