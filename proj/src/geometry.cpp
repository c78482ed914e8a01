#include "diesel/geometry.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace diesel {

NetworkTopology::NetworkTopology(int dim, int num_vehicles, int num_anchors,
                                 const std::vector<std::pair<int, int>>& edges,
                                 std::vector<std::vector<int>> anchor_links)
    : dim_(dim), n_(num_vehicles), m_(num_anchors), anchor_links_(std::move(anchor_links)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (n_ <= 0) throw std::invalid_argument("topology needs at least one vehicle");
  if (m_ < 0) throw std::invalid_argument("negative anchor count");
  if (static_cast<int>(anchor_links_.size()) != n_)
    throw std::invalid_argument("anchor_links must have one entry per vehicle");

  neighbors_.resize(n_);
  incident_edges_.resize(n_);
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n_ || b < 0 || b >= n_)
      throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loop edge");
    Edge e{std::min(a, b), std::max(a, b)};
    if (!seen.insert({e.lo, e.hi}).second)
      throw std::invalid_argument("duplicate edge {" + std::to_string(e.lo) + "," +
                                  std::to_string(e.hi) + "}");
    const int id = static_cast<int>(edges_.size());
    edges_.push_back(e);
    neighbors_[e.lo].push_back(e.hi);
    neighbors_[e.hi].push_back(e.lo);
    incident_edges_[e.lo].push_back(id);
    incident_edges_[e.hi].push_back(id);
  }
  for (auto& adj : neighbors_) std::sort(adj.begin(), adj.end());

  vehicle_links_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    std::set<int> dedup;
    for (int k : anchor_links_[i]) {
      if (k < 0 || k >= m_) throw std::invalid_argument("anchor id out of range");
      if (!dedup.insert(k).second) throw std::invalid_argument("duplicate anchor link");
      vehicle_links_[i].push_back(static_cast<int>(links_.size()));
      links_.emplace_back(i, k);
    }
  }

  // A vehicle with neither a range edge nor an anchor link is unobservable.
  for (int i = 0; i < n_; ++i) {
    if (neighbors_[i].empty() && anchor_links_[i].empty())
      throw std::invalid_argument("vehicle " + std::to_string(i) +
                                  " has no edges and no anchor links");
  }
}

void NetworkTopology::check_vehicle(int vehicle) const {
  if (vehicle < 0 || vehicle >= n_)
    throw std::out_of_range("unknown vehicle id " + std::to_string(vehicle));
}

double NetworkTopology::incidence_sign(int e, int vehicle) const {
  const Edge& ed = edges_.at(e);
  if (vehicle == ed.lo) return 1.0;
  if (vehicle == ed.hi) return -1.0;
  throw std::invalid_argument("vehicle " + std::to_string(vehicle) +
                              " is not an endpoint of edge " + std::to_string(e));
}

const std::vector<int>& NetworkTopology::neighbors(int vehicle) const {
  check_vehicle(vehicle);
  return neighbors_[vehicle];
}

int NetworkTopology::degree(int vehicle) const {
  check_vehicle(vehicle);
  return static_cast<int>(neighbors_[vehicle].size());
}

int NetworkTopology::max_degree() const {
  int dmax = 0;
  for (int i = 0; i < n_; ++i) dmax = std::max(dmax, degree(i));
  return dmax;
}

const std::vector<int>& NetworkTopology::anchor_links(int vehicle) const {
  check_vehicle(vehicle);
  return anchor_links_[vehicle];
}

int NetworkTopology::max_anchor_links() const {
  int amax = 0;
  for (const auto& links : anchor_links_) amax = std::max(amax, static_cast<int>(links.size()));
  return amax;
}

const std::vector<int>& NetworkTopology::incident_edges(int vehicle) const {
  check_vehicle(vehicle);
  return incident_edges_[vehicle];
}

const std::vector<int>& NetworkTopology::vehicle_links(int vehicle) const {
  check_vehicle(vehicle);
  return vehicle_links_[vehicle];
}

}  // namespace diesel
