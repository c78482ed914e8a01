#include "diesel/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "diesel/errors.hpp"

namespace diesel {

double cost_original(const std::vector<std::vector<Vec>>& x, const MeasurementWindow& window,
                     const NetworkTopology& topo) {
  const int W = window.window_len;
  if (static_cast<int>(x.size()) != topo.num_vehicles())
    throw std::invalid_argument("cost_original: one position row per vehicle required");
  for (const auto& row : x)
    if (static_cast<int>(row.size()) != W)
      throw std::invalid_argument("cost_original: one position per window sample required");

  double cost = 0.0;
  for (int tau = 0; tau < W; ++tau) {
    for (int e = 0; e < topo.num_edges(); ++e) {
      const Edge& ed = topo.edge(e);
      const double miss = (x[ed.lo][tau] - x[ed.hi][tau]).norm() - window.ranges[e][tau];
      cost += 0.5 * miss * miss;
    }
    for (int l = 0; l < topo.num_links(); ++l) {
      const auto& [i, k] = topo.links()[l];
      const double miss =
          (x[i][tau] - window.anchor_position(k, tau)).norm() - window.anchor_ranges[l][tau];
      cost += 0.5 * miss * miss;
    }
  }
  return cost;
}

StackedCostParts cost_stacked_parts(const StackedVariable& z, const WindowDeltas& deltas,
                                    const NetworkTopology& topo) {
  const int W = z.window_len();
  if (z.num_vehicles() != topo.num_vehicles() || z.num_edges() != topo.num_edges() ||
      z.num_links() != topo.num_links() || z.dim() != topo.dim())
    throw std::invalid_argument("cost_stacked: variable shape does not match topology");

  StackedCostParts parts;
  Vec res(topo.dim());
  for (int e = 0; e < topo.num_edges(); ++e) {
    const Edge& ed = topo.edge(e);
    for (int tau = 0; tau < W; ++tau) {
      res = z.p(ed.lo) - z.p(ed.hi) + deltas.dv[e][tau] - z.y(e, tau);
      parts.edge_term += 0.5 * res.squaredNorm();
    }
  }
  for (int l = 0; l < topo.num_links(); ++l) {
    const int i = topo.links()[l].first;
    for (int tau = 0; tau < W; ++tau) {
      res = z.p(i) - deltas.alpha[l][tau] - z.w(l, tau);
      parts.anchor_term += 0.5 * res.squaredNorm();
    }
  }
  return parts;
}

double cost_stacked(const StackedVariable& z, const WindowDeltas& deltas,
                    const NetworkTopology& topo) {
  return cost_stacked_parts(z, deltas, topo).total();
}

StackedVariable gradient(const StackedVariable& z, const WindowDeltas& deltas,
                         const NetworkTopology& topo) {
  const int W = z.window_len();
  if (z.num_vehicles() != topo.num_vehicles() || z.num_edges() != topo.num_edges() ||
      z.num_links() != topo.num_links() || z.dim() != topo.dim())
    throw std::invalid_argument("gradient: variable shape does not match topology");

  StackedVariable g = z.zeros_like();
  Vec res(topo.dim());
  for (int e = 0; e < topo.num_edges(); ++e) {
    const Edge& ed = topo.edge(e);
    for (int tau = 0; tau < W; ++tau) {
      res = z.p(ed.lo) - z.p(ed.hi) + deltas.dv[e][tau] - z.y(e, tau);
      g.p(ed.lo) += res;
      g.p(ed.hi) -= res;
      g.y(e, tau) = -res;
    }
  }
  for (int l = 0; l < topo.num_links(); ++l) {
    const int i = topo.links()[l].first;
    for (int tau = 0; tau < W; ++tau) {
      res = z.p(i) - deltas.alpha[l][tau] - z.w(l, tau);
      g.p(i) += res;
      g.w(l, tau) = -res;
    }
  }
  return g;
}

Vec project_to_sphere(const Vec& v, double radius, const Vec& tie_break) {
  if (radius == 0.0) return zero_vec(static_cast<int>(v.size()));
  const double norm = v.norm();
  if (norm == 0.0) return radius * tie_break;
  return (radius / norm) * v;
}

void project_constraints(StackedVariable& z, const MeasurementWindow& window,
                         const NetworkTopology& topo, const Vec& tie_break) {
  const int W = z.window_len();
  for (int e = 0; e < topo.num_edges(); ++e)
    for (int tau = 0; tau < W; ++tau)
      z.y(e, tau) = project_to_sphere(z.y(e, tau), window.ranges[e][tau], tie_break);
  for (int l = 0; l < topo.num_links(); ++l)
    for (int tau = 0; tau < W; ++tau)
      z.w(l, tau) = project_to_sphere(z.w(l, tau), window.anchor_ranges[l][tau], tie_break);
}

StackedVariable projected(StackedVariable z, const MeasurementWindow& window,
                          const NetworkTopology& topo, const Vec& tie_break) {
  project_constraints(z, window, topo, tie_break);
  return z;
}

double lipschitz_bound(const NetworkTopology& topo, int window_len) {
  if (window_len < 1) throw std::invalid_argument("window_len must be >= 1");
  return window_len * (2.0 * topo.max_degree() + topo.max_anchor_links()) + 2.0;
}

std::vector<double> beta_coefficients(const NetworkTopology& topo, int window_len, double L) {
  std::vector<double> beta(topo.num_vehicles());
  for (int i = 0; i < topo.num_vehicles(); ++i) {
    const double load = static_cast<double>(window_len) *
                        (topo.degree(i) + static_cast<double>(topo.anchor_links(i).size()));
    beta[i] = (L - load) / L;
    if (!(beta[i] > 0.0))
      throw ConfigError("Lipschitz constant " + std::to_string(L) +
                        " too small for vehicle " + std::to_string(i) +
                        " (beta would be non-positive)");
  }
  return beta;
}

}  // namespace diesel
