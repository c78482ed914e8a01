#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diesel/problem.hpp"

namespace diesel {
namespace oracle {

// Dense materialization of the stacked quadratic F(z) = 1/2 z'Mz - b'z + c.
// Test oracle only: the solver never touches these matrices.
struct DenseQuadratic {
  Eigen::MatrixXd M;
  Eigen::VectorXd b;
  double constant = 0.0;  // 1/2 (||dv||^2 + ||alpha||^2)

  double cost(const Eigen::VectorXd& z) const {
    return 0.5 * z.dot(M * z) - b.dot(z) + constant;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& z) const { return M * z - b; }
};

DenseQuadratic build_dense(const NetworkTopology& topo, const WindowDeltas& deltas,
                           int window_len);

// One projected-gradient step z+ = P_Z(z - (1/L)(Mz - b)) through the dense
// matrices, with the pre-projection point accumulated in long double so the
// reference is accurate to well below the equivalence tolerance.
StackedVariable centralized_reference_step(const StackedVariable& z,
                                           const NetworkTopology& topo,
                                           const MeasurementWindow& window,
                                           const WindowDeltas& deltas, double L,
                                           const Vec& tie_break);

// Largest eigenvalue of a symmetric PSD operator by power iteration.
double power_iteration_lambda_max(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, int dim,
    double rel_tol = 1e-8, int max_iters = 20000, uint64_t seed = 7);

// Matrix-free M application built from the gradient: Mv = grad(v) - grad(0).
std::function<Eigen::VectorXd(const Eigen::VectorXd&)> matrix_free_operator(
    const NetworkTopology& topo, const WindowDeltas& deltas, int window_len);

// Randomized small problem instance for oracle suites.
struct RandomInstance {
  NetworkTopology topo;
  MeasurementWindow window;
  WindowDeltas deltas;
  StackedVariable z;  // random, projected onto the constraint set
};

RandomInstance random_instance(uint64_t seed, int max_vehicles = 8, int max_anchors = 2,
                               int max_window = 6);

// Distributed-vs-centralized equivalence over randomized instances: one full
// synchronous round against one dense-oracle step.
struct EquivalenceReport {
  int instances = 0;
  double max_abs_diff = 0.0;
  bool pass = false;
  std::vector<std::string> lines;
};

EquivalenceReport run_equivalence_suite(int instances, uint64_t seed, double tol = 1e-12);

}  // namespace oracle
}  // namespace diesel
