#pragma once

#include <cstdint>
#include <vector>

#include "diesel/geometry.hpp"
#include "diesel/tracker.hpp"

namespace diesel {

enum class TrajectoryKind { lap, lawnmower, helix };

struct TrajectoryParams {
  TrajectoryKind kind = TrajectoryKind::lap;
  double speed = 1.0;         // along-path speed, m/s
  double leg_length = 100.0;  // straight segments (lap, lawnmower), m
  double lap_radius = 30.0;   // semicircular lap ends, m
  double leg_spacing = 20.0;  // lawnmower row spacing, m
  double helix_radius = 30.0;
  double descent_rate = 0.1;  // m/s downward (helix)
};

int trajectory_dim(TrajectoryKind kind);

// Path centerline at a given arc length (the lap wraps at its perimeter).
Vec path_point(const TrajectoryParams& params, double arc_length);
// Unit tangent, used to place lateral formation offsets.
Vec path_tangent(const TrajectoryParams& params, double arc_length);
// Left-hand unit normal in the horizontal plane.
Vec path_normal(const TrajectoryParams& params, double arc_length);

double lap_perimeter(const TrajectoryParams& params);

// Four vehicles sweeping parallel tracks; the center two slots are the
// GPS-carrying anchors.  lateral_offsets are signed cross-track distances
// from the centerline; along_track_offsets stagger the slots along the
// direction of travel.  The default staggers the anchors fore and aft: with
// every vehicle on one cross-track line the anchor range circles meet the
// free vehicles tangentially and the along-track direction becomes
// second-order unobservable to range-only methods.
struct FormationConfig {
  std::vector<double> lateral_offsets = {-9.0, -3.0, 3.0, 9.0};
  std::vector<double> along_track_offsets = {0.0, 5.0, -5.0, 0.0};
  std::vector<int> anchor_slots = {1, 2};

  int num_slots() const { return static_cast<int>(lateral_offsets.size()); }
  bool is_anchor(int slot) const;
  // Slot index for each topology vehicle id / anchor id (order-preserving).
  std::vector<int> free_slots() const;
};

struct NoiseConfig {
  double sigma_range = 0.5;  // m
  double sigma_vel = 0.01;   // m/s
  double sigma_init = 2.0;   // m, initialization dispersion
  Vec current;               // fluid velocity v_f; empty means zero
  uint64_t seed = 0;

  Vec resolved_current(int dim) const {
    return current.size() == dim ? current : zero_vec(dim);
  }
};

// Exact discrete ground truth.  Positions are stored without the current so
// pairwise geometry is independent of v_f; the true (inertial) position adds
// the accumulated drift.  The kinematics x(t+1) = x(t) + dt*(v_R(t) + v_f)
// hold exactly by construction.
struct GroundTruth {
  double dt = 1.0;
  Vec current;                                   // v_f
  std::vector<std::vector<Vec>> drift_free;      // [slot][tick]
  std::vector<std::vector<Vec>> rel_velocities;  // [slot][tick], v_R

  int ticks() const { return drift_free.empty() ? 0 : static_cast<int>(drift_free[0].size()); }
  int num_slots() const { return static_cast<int>(drift_free.size()); }
  int dim() const { return static_cast<int>(current.size()); }

  Vec position(int slot, int tick) const {
    return drift_free[slot][tick] + (tick * dt) * current;
  }
};

// Formation sweep along the chosen path.  Velocities are the exact discrete
// position differences over dt minus the current.
GroundTruth generate_trajectory(const TrajectoryParams& params, const FormationConfig& formation,
                                int duration_ticks, double dt, const Vec& current);

// Default measurement graph for a formation: complete graph among the free
// vehicles plus links from every free vehicle to every anchor.
NetworkTopology formation_topology(const FormationConfig& formation, int dim);

// Noisy measurement stream: one Gaussian draw per measurement per tick, all
// keyed off the config seed, ranges clamped at zero.  Anchor positions are
// reported exactly (GPS), including current drift.
std::vector<StreamSample> synthesize_measurements(const GroundTruth& truth,
                                                  const NetworkTopology& topo,
                                                  const FormationConfig& formation,
                                                  const NoiseConfig& noise);

// Initialization draw shared by every method in a trial: truth at the first
// tick perturbed by N(0, sigma_init^2 I) per free vehicle.
std::vector<Vec> draw_initial_positions(const GroundTruth& truth,
                                        const FormationConfig& formation,
                                        const NoiseConfig& noise);

}  // namespace diesel
