#include "diesel/baselines.hpp"

#include <stdexcept>
#include <utility>

#include "diesel/errors.hpp"

namespace diesel {

namespace {

TrackerOptions static_options(SolverParams solver) {
  TrackerOptions opts;
  opts.window_len = 1;
  opts.solver = std::move(solver);
  return opts;
}

}  // namespace

StaticLocalizer::StaticLocalizer(const NetworkTopology& topo, SolverParams solver,
                                 std::vector<Vec> initial_positions)
    : tracker_(topo, static_options(std::move(solver)), std::move(initial_positions)) {
  if (topo.num_links() == 0)
    throw ConfigError("static localization needs at least one anchor link");
}

TrackEstimate StaticLocalizer::push(const StreamSample& sample) {
  StreamSample stripped = sample;
  for (Vec& v : stripped.velocities) v.setZero();
  return tracker_.push(stripped);
}

Ekf::Ekf(const NetworkTopology& topo, EkfParams params, const std::vector<Vec>& initial_mean,
         double initial_var)
    : topo_(topo), params_(params) {
  const int d = topo_.dim();
  const int n = topo_.num_vehicles();
  if (static_cast<int>(initial_mean.size()) != n)
    throw std::invalid_argument("one initial mean per vehicle required");
  if (initial_var < 0) throw std::invalid_argument("negative initial variance");
  mean_.resize(n * d);
  for (int i = 0; i < n; ++i) mean_.segment(i * d, d) = initial_mean[i];
  cov_ = initial_var * Eigen::MatrixXd::Identity(n * d, n * d);
}

void Ekf::predict(const std::vector<Vec>& velocities, double dt) {
  const int d = topo_.dim();
  if (static_cast<int>(velocities.size()) != topo_.num_vehicles())
    throw std::invalid_argument("one velocity per vehicle required");
  for (int i = 0; i < topo_.num_vehicles(); ++i)
    mean_.segment(i * d, d) += dt * velocities[i];
  cov_.diagonal().array() += params_.process_noise * dt * dt;
}

void Ekf::update(const StreamSample& sample) {
  const int d = topo_.dim();
  const int dim = static_cast<int>(mean_.size());

  // Collect usable rows: vehicle-vehicle ranges, then anchor ranges.
  std::vector<Eigen::RowVectorXd> jac_rows;
  std::vector<double> innovations;
  for (int e = 0; e < topo_.num_edges(); ++e) {
    const Edge& ed = topo_.edge(e);
    const Vec diff = Vec(mean_.segment(ed.lo * d, d) - mean_.segment(ed.hi * d, d));
    const double pred = diff.norm();
    if (pred < 1e-9) continue;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
    row.segment(ed.lo * d, d) = diff.transpose() / pred;
    row.segment(ed.hi * d, d) = -diff.transpose() / pred;
    jac_rows.push_back(std::move(row));
    innovations.push_back(sample.ranges[e] - pred);
  }
  for (int l = 0; l < topo_.num_links(); ++l) {
    const auto& [i, k] = topo_.links()[l];
    const Vec diff = Vec(mean_.segment(i * d, d)) - sample.anchor_positions[k];
    const double pred = diff.norm();
    if (pred < 1e-9) continue;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
    row.segment(i * d, d) = diff.transpose() / pred;
    jac_rows.push_back(std::move(row));
    innovations.push_back(sample.anchor_ranges[l] - pred);
  }
  if (jac_rows.empty()) return;

  const int mrows = static_cast<int>(jac_rows.size());
  Eigen::MatrixXd H(mrows, dim);
  Eigen::VectorXd innov(mrows);
  for (int r = 0; r < mrows; ++r) {
    H.row(r) = jac_rows[r];
    innov(r) = innovations[r];
  }

  const Eigen::MatrixXd HP = H * cov_;
  Eigen::MatrixXd S = HP * H.transpose();
  S.diagonal().array() += params_.range_noise;
  const Eigen::MatrixXd K = S.ldlt().solve(HP).transpose();

  mean_ += K * innov;
  cov_ -= K * HP;
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

  if (!mean_.allFinite() || !cov_.allFinite())
    throw FilterDivergence("EKF state became non-finite");
}

std::vector<Vec> Ekf::positions() const {
  const int d = topo_.dim();
  std::vector<Vec> out(topo_.num_vehicles());
  for (int i = 0; i < topo_.num_vehicles(); ++i) out[i] = mean_.segment(i * d, d);
  return out;
}

}  // namespace diesel
