#pragma once

#include <vector>

#include "diesel/geometry.hpp"
#include "diesel/window.hpp"

namespace diesel {

// Windowed range-plus-velocity estimation problem.  The quadratic form
// (M, b) is never materialized here; every operator below walks edges and
// anchor links directly.  A dense materialization exists in oracle.hpp for
// testing only.

// Sum over the window of squared range misfits at the given per-sample
// positions x[vehicle][tau]:
//   sum_tau [ sum_edges 1/2 (||x_i - x_j|| - d_ij)^2
//           + sum_links 1/2 (||x_i - a_k|| - r_ik)^2 ].
double cost_original(const std::vector<std::vector<Vec>>& x, const MeasurementWindow& window,
                     const NetworkTopology& topo);

struct StackedCostParts {
  double edge_term = 0.0;
  double anchor_term = 0.0;
  double total() const { return edge_term + anchor_term; }
};

// Residual form of the stacked cost,
//   1/2 ||DAp + dv - y||^2 + 1/2 ||Ep - alpha - w||^2,
// reported in full (the constant part dropped by the pure quadratic form is
// kept, so the value is the true squared misfit).
StackedCostParts cost_stacked_parts(const StackedVariable& z, const WindowDeltas& deltas,
                                    const NetworkTopology& topo);

double cost_stacked(const StackedVariable& z, const WindowDeltas& deltas,
                    const NetworkTopology& topo);

// Gradient of the stacked cost (equals Mz - b), evaluated matrix-free.
StackedVariable gradient(const StackedVariable& z, const WindowDeltas& deltas,
                         const NetworkTopology& topo);

// Nearest point on the sphere of the given radius; zero input maps to
// radius * tie_break, and a zero radius collapses to the zero vector.
Vec project_to_sphere(const Vec& v, double radius, const Vec& tie_break);

// Projection onto the constraint set: every y block scaled to its measured
// edge range, every w block to its anchor range; p untouched.  Total and
// idempotent.
void project_constraints(StackedVariable& z, const MeasurementWindow& window,
                         const NetworkTopology& topo, const Vec& tie_break);

StackedVariable projected(StackedVariable z, const MeasurementWindow& window,
                          const NetworkTopology& topo, const Vec& tie_break);

// Gradient Lipschitz constant W * (2 * delta_max + max_i |A_i|) + 2.  The
// window length W enters where a window-size factor is needed; this keeps
// the bound above lambda_max(M) (checked spectrally in the tests).
double lipschitz_bound(const NetworkTopology& topo, int window_len);

// Per-vehicle convex-combination weight of the node p-update,
//   beta_i = (L - W * (degree_i + |A_i|)) / L,
// which makes the per-node update identical to the centralized gradient
// step.  Throws ConfigError if L is too small to keep every beta positive.
std::vector<double> beta_coefficients(const NetworkTopology& topo, int window_len, double L);

// Step-size and stopping configuration for one window solve.
struct SolverParams {
  // Gradient Lipschitz constant; 0 means "derive from lipschitz_bound".
  double lipschitz = 0.0;
  int max_iters = 200;
  double rel_tol = 1e-6;
  // Unit direction used when a zero block must be projected onto a sphere.
  // Empty means the first canonical axis.
  Vec tie_break;

  Vec resolved_tie_break(int dim) const {
    return tie_break.size() == dim ? tie_break : unit_x(dim);
  }
  double resolved_lipschitz(const NetworkTopology& topo, int window_len) const {
    return lipschitz > 0 ? lipschitz : lipschitz_bound(topo, window_len);
  }
};

}  // namespace diesel
