#include "diesel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "diesel/rng.hpp"
#include "diesel/solver.hpp"

namespace diesel {
namespace oracle {

namespace {

using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

int p_col(const NetworkTopology& topo, int vehicle) { return vehicle * topo.dim(); }

int y_col(const NetworkTopology& topo, int W, int edge, int tau) {
  return topo.num_vehicles() * topo.dim() + (edge * W + tau) * topo.dim();
}

int w_col(const NetworkTopology& topo, int W, int link, int tau) {
  return topo.num_vehicles() * topo.dim() + topo.num_edges() * W * topo.dim() +
         (link * W + tau) * topo.dim();
}

}  // namespace

DenseQuadratic build_dense(const NetworkTopology& topo, const WindowDeltas& deltas,
                           int window_len) {
  const int d = topo.dim();
  const int W = window_len;
  const int zdim = (topo.num_vehicles() + (topo.num_edges() + topo.num_links()) * W) * d;
  const int rows = (topo.num_edges() + topo.num_links()) * W * d;

  // Residual map G z + c with c = (dv, -alpha); then M = G'G, b = -G'c.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, zdim);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(rows);

  int row = 0;
  for (int e = 0; e < topo.num_edges(); ++e) {
    const Edge& ed = topo.edge(e);
    for (int tau = 0; tau < W; ++tau, row += d) {
      for (int r = 0; r < d; ++r) {
        G(row + r, p_col(topo, ed.lo) + r) += 1.0;
        G(row + r, p_col(topo, ed.hi) + r) -= 1.0;
        G(row + r, y_col(topo, W, e, tau) + r) -= 1.0;
        c(row + r) = deltas.dv[e][tau](r);
      }
    }
  }
  for (int l = 0; l < topo.num_links(); ++l) {
    const int i = topo.links()[l].first;
    for (int tau = 0; tau < W; ++tau, row += d) {
      for (int r = 0; r < d; ++r) {
        G(row + r, p_col(topo, i) + r) += 1.0;
        G(row + r, w_col(topo, W, l, tau) + r) -= 1.0;
        c(row + r) = -deltas.alpha[l][tau](r);
      }
    }
  }

  DenseQuadratic q;
  q.M = G.transpose() * G;
  q.b = -G.transpose() * c;
  q.constant = 0.5 * c.squaredNorm();
  return q;
}

StackedVariable centralized_reference_step(const StackedVariable& z,
                                           const NetworkTopology& topo,
                                           const MeasurementWindow& window,
                                           const WindowDeltas& deltas, double L,
                                           const Vec& tie_break) {
  const DenseQuadratic q = build_dense(topo, deltas, window.window_len);

  // Accumulate the gradient step in extended precision; the projection is the
  // shared double-precision implementation so both routes land on the same
  // spheres.
  const LongVector zl = z.flat().cast<long double>();
  const LongVector pre =
      zl - (1.0L / static_cast<long double>(L)) *
               (q.M.cast<long double>() * zl - q.b.cast<long double>());

  StackedVariable out = z;
  out.flat() = pre.cast<double>();
  project_constraints(out, window, topo, tie_break);
  return out;
}

double power_iteration_lambda_max(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, int dim,
    double rel_tol, int max_iters, uint64_t seed) {
  CounterRng rng(seed);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.uniform(0x9e0f, i) - 0.5;
  v.normalize();

  double lambda = 0.0;
  for (int k = 0; k < max_iters; ++k) {
    Eigen::VectorXd wv = apply(v);
    const double next = v.dot(wv);
    const double norm = wv.norm();
    if (norm == 0.0) return 0.0;
    v = wv / norm;
    if (k > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&)> matrix_free_operator(
    const NetworkTopology& topo, const WindowDeltas& deltas, int window_len) {
  StackedVariable zero(topo, window_len);
  const Eigen::VectorXd g0 = gradient(zero, deltas, topo).flat();
  return [topo, deltas, window_len, g0](const Eigen::VectorXd& v) {
    StackedVariable zv(topo, window_len);
    zv.flat() = v;
    return Eigen::VectorXd(gradient(zv, deltas, topo).flat() - g0);
  };
}

namespace {

int pick_int(const CounterRng& rng, uint64_t k1, uint64_t k2, int lo, int hi) {
  const double u = rng.uniform(k1, k2);
  return std::min(hi, lo + static_cast<int>(u * (hi - lo + 1)));
}

}  // namespace

RandomInstance random_instance(uint64_t seed, int max_vehicles, int max_anchors,
                               int max_window) {
  const CounterRng rng(seed);
  const int d = pick_int(rng, 1, 0, 2, 3);
  const int n = pick_int(rng, 2, 0, 2, max_vehicles);
  const int m = pick_int(rng, 3, 0, 0, max_anchors);
  const int W = pick_int(rng, 4, 0, 1, max_window);
  const double dt = (rng.uniform(5, 0) < 0.5) ? 0.5 : 1.0;

  // Random chain covers every vehicle; extra edges densify.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[pick_int(rng, 6, static_cast<uint64_t>(i), 0, i)]);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(order[i], order[i + 1]);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const bool chained = [&] {
        for (const auto& e : edges)
          if ((e.first == a && e.second == b) || (e.first == b && e.second == a)) return true;
        return false;
      }();
      if (!chained && rng.uniform(7, static_cast<uint64_t>(a * 64 + b)) < 0.3)
        edges.emplace_back(a, b);
    }
  }

  std::vector<std::vector<int>> anchor_links(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k)
      if (rng.uniform(8, static_cast<uint64_t>(i), static_cast<uint64_t>(k)) < 0.5)
        anchor_links[i].push_back(k);

  NetworkTopology topo(d, n, m, edges, anchor_links);

  MeasurementWindow window;
  window.window_len = W;
  window.dt = dt;
  window.ranges.resize(topo.num_edges());
  for (int e = 0; e < topo.num_edges(); ++e) {
    window.ranges[e].resize(W);
    for (int tau = 0; tau < W; ++tau)
      window.ranges[e][tau] =
          0.5 + 24.5 * rng.uniform(9, static_cast<uint64_t>(e), static_cast<uint64_t>(tau));
  }
  window.anchor_ranges.resize(topo.num_links());
  for (int l = 0; l < topo.num_links(); ++l) {
    window.anchor_ranges[l].resize(W);
    for (int tau = 0; tau < W; ++tau)
      window.anchor_ranges[l][tau] =
          0.5 + 24.5 * rng.uniform(10, static_cast<uint64_t>(l), static_cast<uint64_t>(tau));
  }
  window.rel_velocities.resize(n);
  for (int i = 0; i < n; ++i) {
    window.rel_velocities[i].resize(W);
    for (int tau = 0; tau < W; ++tau) {
      Vec v(d);
      for (int r = 0; r < d; ++r)
        v(r) = 2.0 * rng.uniform(11, static_cast<uint64_t>(i), static_cast<uint64_t>(tau),
                                 static_cast<uint64_t>(r)) -
               1.0;
      window.rel_velocities[i][tau] = v;
    }
  }
  window.anchor_base.resize(m);
  window.anchor_cum_vel.resize(m);
  for (int k = 0; k < m; ++k) {
    Vec q(d);
    for (int r = 0; r < d; ++r)
      q(r) = 20.0 * rng.uniform(12, static_cast<uint64_t>(k), static_cast<uint64_t>(r)) - 10.0;
    window.anchor_base[k] = q;
    window.anchor_cum_vel[k].resize(W);
    Vec cum = zero_vec(d);
    for (int tau = 0; tau < W; ++tau) {
      window.anchor_cum_vel[k][tau] = cum;
      Vec uk(d);
      for (int r = 0; r < d; ++r)
        uk(r) = 2.0 * rng.uniform(13, static_cast<uint64_t>(k), static_cast<uint64_t>(tau),
                                  static_cast<uint64_t>(r)) -
                1.0;
      cum += uk;
    }
  }

  StackedVariable z(topo, W);
  for (int i = 0; i < z.size(); ++i)
    z.flat()(i) = 20.0 * rng.uniform(14, static_cast<uint64_t>(i)) - 10.0;
  project_constraints(z, window, topo, unit_x(d));

  WindowDeltas deltas = window_deltas(window, topo);
  return RandomInstance{std::move(topo), std::move(window), std::move(deltas), std::move(z)};
}

EquivalenceReport run_equivalence_suite(int instances, uint64_t seed, double tol) {
  EquivalenceReport report;
  report.instances = instances;
  bool all_ok = true;
  for (int t = 0; t < instances; ++t) {
    RandomInstance inst = random_instance(mix64(seed + static_cast<uint64_t>(t)));
    const double L = lipschitz_bound(inst.topo, inst.window.window_len);
    SolverParams params;
    params.lipschitz = L;

    SynchronousEngine engine(inst.topo, inst.window, inst.z, params);
    engine.step();
    const StackedVariable distributed = engine.gather();
    const StackedVariable reference = centralized_reference_step(
        inst.z, inst.topo, inst.window, inst.deltas, L, params.resolved_tie_break(inst.topo.dim()));

    const double diff =
        (distributed.flat() - reference.flat()).lpNorm<Eigen::Infinity>();
    report.max_abs_diff = std::max(report.max_abs_diff, diff);
    all_ok = all_ok && diff <= tol;

    std::ostringstream line;
    line << "instance " << t << ": n=" << inst.topo.num_vehicles()
         << " m=" << inst.topo.num_anchors() << " |E|=" << inst.topo.num_edges()
         << " W=" << inst.window.window_len << " d=" << inst.topo.dim()
         << " max|diff|=" << diff << (diff <= tol ? "" : "  <-- FAIL");
    report.lines.push_back(line.str());
  }
  report.pass = all_ok;
  return report;
}

}  // namespace oracle
}  // namespace diesel
