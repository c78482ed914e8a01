#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace diesel {

// Positions and velocities live in R^2 or R^3; the dimension is fixed at
// runtime per scenario.  Max-size-3 vectors stay on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

inline Vec zero_vec(int dim) { return Vec::Zero(dim); }

// First canonical axis; the deterministic tie-break direction when a zero
// vector has to be projected onto a sphere.
inline Vec unit_x(int dim) {
  Vec e = Vec::Zero(dim);
  e(0) = 1.0;
  return e;
}

// Unordered vehicle pair, stored with lo < hi.  The incidence sign convention
// assigns +1 to the lower-numbered endpoint and -1 to the higher one; any
// consistent orientation gives the same cost.
struct Edge {
  int lo;
  int hi;
};

// Measurement/communication graph over one window: n vehicles with unknown
// positions, m anchors with known tracks, range edges between vehicles and
// range links from vehicles to anchors.  Immutable after construction and
// safe to share across concurrent trials.
class NetworkTopology {
 public:
  // edges: unordered vehicle pairs (either orientation accepted).
  // anchor_links[i]: the anchors vehicle i holds range measurements to.
  NetworkTopology(int dim, int num_vehicles, int num_anchors,
                  const std::vector<std::pair<int, int>>& edges,
                  std::vector<std::vector<int>> anchor_links);

  int dim() const { return dim_; }
  int num_vehicles() const { return n_; }
  int num_anchors() const { return m_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_.at(e); }

  // +1 for the lower-numbered endpoint, -1 for the higher one.
  double incidence_sign(int e, int vehicle) const;

  // Sorted, duplicate-free adjacent vehicles; length == degree(vehicle).
  const std::vector<int>& neighbors(int vehicle) const;

  int degree(int vehicle) const;
  int max_degree() const;

  const std::vector<int>& anchor_links(int vehicle) const;
  int max_anchor_links() const;

  // Edge ids incident to a vehicle, in edge-id order.
  const std::vector<int>& incident_edges(int vehicle) const;

  // Anchor links flattened to (vehicle, anchor) pairs, grouped by vehicle in
  // vehicle order.  This fixes the w-block layout of the stacked variable.
  const std::vector<std::pair<int, int>>& links() const { return links_; }
  int num_links() const { return static_cast<int>(links_.size()); }
  // Global link ids owned by a vehicle (contiguous).
  const std::vector<int>& vehicle_links(int vehicle) const;

 private:
  void check_vehicle(int vehicle) const;

  int dim_;
  int n_;
  int m_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> anchor_links_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> incident_edges_;
  std::vector<std::pair<int, int>> links_;
  std::vector<std::vector<int>> vehicle_links_;
};

}  // namespace diesel
