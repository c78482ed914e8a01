#include "diesel/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "diesel/errors.hpp"
#include "diesel/rng.hpp"

namespace diesel {

namespace {

// Draw-kind tags for the counter RNG keys.
constexpr uint64_t kEdgeRange = 1;
constexpr uint64_t kAnchorRange = 2;
constexpr uint64_t kVelocity = 3;
constexpr uint64_t kInit = 4;

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0) r += period;
  return r;
}

}  // namespace

int trajectory_dim(TrajectoryKind kind) { return kind == TrajectoryKind::helix ? 3 : 2; }

double lap_perimeter(const TrajectoryParams& params) {
  return 2.0 * params.leg_length + 2.0 * M_PI * params.lap_radius;
}

Vec path_point(const TrajectoryParams& params, double arc_length) {
  switch (params.kind) {
    case TrajectoryKind::lap: {
      const double Lg = params.leg_length;
      const double R = params.lap_radius;
      const double s = wrap(arc_length, lap_perimeter(params));
      Vec p(2);
      if (s < Lg) {
        p << s, 0.0;
      } else if (s < Lg + M_PI * R) {
        const double phi = (s - Lg) / R;
        p << Lg + R * std::sin(phi), R - R * std::cos(phi);
      } else if (s < 2 * Lg + M_PI * R) {
        p << Lg - (s - Lg - M_PI * R), 2 * R;
      } else {
        const double phi = (s - 2 * Lg - M_PI * R) / R;
        p << -R * std::sin(phi), R + R * std::cos(phi);
      }
      return p;
    }
    case TrajectoryKind::lawnmower: {
      const double Lg = params.leg_length;
      const double rho = 0.5 * params.leg_spacing;
      const double seg = Lg + M_PI * rho;
      const int k = static_cast<int>(std::floor(arc_length / seg));
      const double s = arc_length - k * seg;
      const double x0 = k * params.leg_spacing;
      const bool up = (k % 2 == 0);
      Vec p(2);
      if (s < Lg) {
        p << x0, (up ? s : Lg - s);
      } else {
        const double phi = (s - Lg) / rho;
        if (up)
          p << x0 + rho - rho * std::cos(phi), Lg + rho * std::sin(phi);
        else
          p << x0 + rho - rho * std::cos(phi), -rho * std::sin(phi);
      }
      return p;
    }
    case TrajectoryKind::helix: {
      const double R = params.helix_radius;
      const double v = params.speed;
      const double c = params.descent_rate;
      const double h = std::sqrt(v * v - c * c);
      const double t = arc_length / v;  // seconds along the path
      const double theta = h * t / R;
      Vec p(3);
      p << R * std::cos(theta), R * std::sin(theta), -c * t;
      return p;
    }
  }
  throw std::invalid_argument("unknown trajectory kind");
}

Vec path_tangent(const TrajectoryParams& params, double arc_length) {
  switch (params.kind) {
    case TrajectoryKind::lap: {
      const double Lg = params.leg_length;
      const double R = params.lap_radius;
      const double s = wrap(arc_length, lap_perimeter(params));
      Vec t(2);
      if (s < Lg) {
        t << 1.0, 0.0;
      } else if (s < Lg + M_PI * R) {
        const double phi = (s - Lg) / R;
        t << std::cos(phi), std::sin(phi);
      } else if (s < 2 * Lg + M_PI * R) {
        t << -1.0, 0.0;
      } else {
        const double phi = (s - 2 * Lg - M_PI * R) / R;
        t << -std::cos(phi), -std::sin(phi);
      }
      return t;
    }
    case TrajectoryKind::lawnmower: {
      const double Lg = params.leg_length;
      const double rho = 0.5 * params.leg_spacing;
      const double seg = Lg + M_PI * rho;
      const int k = static_cast<int>(std::floor(arc_length / seg));
      const double s = arc_length - k * seg;
      const bool up = (k % 2 == 0);
      Vec t(2);
      if (s < Lg) {
        t << 0.0, (up ? 1.0 : -1.0);
      } else {
        const double phi = (s - Lg) / rho;
        if (up)
          t << std::sin(phi), std::cos(phi);
        else
          t << std::sin(phi), -std::cos(phi);
      }
      return t;
    }
    case TrajectoryKind::helix: {
      const double R = params.helix_radius;
      const double v = params.speed;
      const double c = params.descent_rate;
      const double h = std::sqrt(v * v - c * c);
      const double t = arc_length / v;
      const double theta = h * t / R;
      Vec tg(3);
      tg << -h * std::sin(theta) / v, h * std::cos(theta) / v, -c / v;
      return tg;
    }
  }
  throw std::invalid_argument("unknown trajectory kind");
}

Vec path_normal(const TrajectoryParams& params, double arc_length) {
  const Vec t = path_tangent(params, arc_length);
  if (t.size() == 2) {
    Vec n(2);
    n << -t(1), t(0);
    return n;
  }
  // Horizontal left normal for the helix: offsets land on concentric helices.
  const double hn = std::hypot(t(0), t(1));
  Vec n(3);
  n << -t(1) / hn, t(0) / hn, 0.0;
  return n;
}

bool FormationConfig::is_anchor(int slot) const {
  return std::find(anchor_slots.begin(), anchor_slots.end(), slot) != anchor_slots.end();
}

std::vector<int> FormationConfig::free_slots() const {
  std::vector<int> free;
  for (int s = 0; s < num_slots(); ++s)
    if (!is_anchor(s)) free.push_back(s);
  return free;
}

GroundTruth generate_trajectory(const TrajectoryParams& params, const FormationConfig& formation,
                                int duration_ticks, double dt, const Vec& current) {
  const int d = trajectory_dim(params.kind);
  if (duration_ticks < 1) throw ConfigError("duration_ticks must be >= 1");
  if (dt <= 0) throw ConfigError("dt must be positive");
  if (params.speed <= 0) throw ConfigError("speed must be positive");
  if (formation.num_slots() < 1) throw ConfigError("formation needs at least one slot");
  if (formation.along_track_offsets.size() != formation.lateral_offsets.size())
    throw ConfigError("along_track_offsets must match lateral_offsets in length");
  for (int s : formation.anchor_slots)
    if (s < 0 || s >= formation.num_slots()) throw ConfigError("anchor slot out of range");
  if (current.size() != 0 && current.size() != d)
    throw ConfigError("current dimension does not match the trajectory (helix needs 3-d)");

  double min_turn_radius = 0.0;
  switch (params.kind) {
    case TrajectoryKind::lap:
      if (params.lap_radius <= 0 || params.leg_length <= 0)
        throw ConfigError("lap geometry must be positive");
      min_turn_radius = params.lap_radius;
      break;
    case TrajectoryKind::lawnmower:
      if (params.leg_spacing <= 0 || params.leg_length <= 0)
        throw ConfigError("lawnmower geometry must be positive");
      min_turn_radius = 0.5 * params.leg_spacing;
      break;
    case TrajectoryKind::helix:
      if (params.helix_radius <= 0) throw ConfigError("helix radius must be positive");
      if (params.descent_rate <= 0 || params.descent_rate >= params.speed)
        throw ConfigError("descent rate must lie in (0, speed)");
      min_turn_radius = params.helix_radius;
      break;
  }
  for (double off : formation.lateral_offsets)
    if (std::abs(off) >= min_turn_radius)
      throw ConfigError("lateral offset " + std::to_string(off) +
                        " exceeds the tightest turn radius " +
                        std::to_string(min_turn_radius));

  GroundTruth truth;
  truth.dt = dt;
  truth.current = current.size() == d ? current : zero_vec(d);

  const int slots = formation.num_slots();
  truth.drift_free.assign(slots, std::vector<Vec>(duration_ticks));
  truth.rel_velocities.assign(slots, std::vector<Vec>(duration_ticks));

  for (int s = 0; s < slots; ++s) {
    // Sample the offset path one tick past the end so the last tick still has
    // an exact velocity, then integrate so the discrete kinematics hold
    // bit-exactly.
    std::vector<Vec> on_path(duration_ticks + 1);
    for (int t = 0; t <= duration_ticks; ++t) {
      const double arc = params.speed * t * dt;
      on_path[t] = path_point(params, arc) +
                   formation.lateral_offsets[s] * path_normal(params, arc) +
                   formation.along_track_offsets[s] * path_tangent(params, arc);
    }
    truth.drift_free[s][0] = on_path[0];
    for (int t = 0; t < duration_ticks; ++t) {
      truth.rel_velocities[s][t] = (on_path[t + 1] - on_path[t]) / dt;
      if (t + 1 < duration_ticks)
        truth.drift_free[s][t + 1] =
            truth.drift_free[s][t] + dt * truth.rel_velocities[s][t];
    }
  }
  return truth;
}

NetworkTopology formation_topology(const FormationConfig& formation, int dim) {
  const std::vector<int> free = formation.free_slots();
  const int n = static_cast<int>(free.size());
  const int m = static_cast<int>(formation.anchor_slots.size());
  if (n < 1) throw ConfigError("formation has no free vehicles");

  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) edges.emplace_back(a, b);
  std::vector<std::vector<int>> links(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) links[i].push_back(k);
  return NetworkTopology(dim, n, m, edges, links);
}

std::vector<StreamSample> synthesize_measurements(const GroundTruth& truth,
                                                  const NetworkTopology& topo,
                                                  const FormationConfig& formation,
                                                  const NoiseConfig& noise) {
  if (noise.sigma_range < 0 || noise.sigma_vel < 0 || noise.sigma_init < 0)
    throw ConfigError("noise standard deviations must be >= 0");

  const CounterRng rng(noise.seed);
  const std::vector<int> free = formation.free_slots();
  const std::vector<int>& anchors = formation.anchor_slots;
  if (static_cast<int>(free.size()) != topo.num_vehicles() ||
      static_cast<int>(anchors.size()) != topo.num_anchors())
    throw ConfigError("topology does not match the formation layout");

  const int d = truth.dim();
  std::vector<StreamSample> stream(truth.ticks());
  for (int t = 0; t < truth.ticks(); ++t) {
    StreamSample& s = stream[t];
    s.tick = t;
    s.ranges.resize(topo.num_edges());
    for (int e = 0; e < topo.num_edges(); ++e) {
      const Edge& ed = topo.edge(e);
      // Pairwise distances are taken in drift-free coordinates; the common
      // current drift cancels in the difference anyway.
      const double base =
          (truth.drift_free[free[ed.lo]][t] - truth.drift_free[free[ed.hi]][t]).norm();
      s.ranges[e] = std::max(
          0.0, base + noise.sigma_range * rng.gaussian(kEdgeRange, t, e));
    }
    s.anchor_ranges.resize(topo.num_links());
    for (int l = 0; l < topo.num_links(); ++l) {
      const auto& [i, k] = topo.links()[l];
      const double base =
          (truth.drift_free[free[i]][t] - truth.drift_free[anchors[k]][t]).norm();
      s.anchor_ranges[l] = std::max(
          0.0, base + noise.sigma_range * rng.gaussian(kAnchorRange, t, l));
    }
    s.velocities.resize(topo.num_vehicles());
    for (int i = 0; i < topo.num_vehicles(); ++i) {
      Vec v = truth.rel_velocities[free[i]][t];
      for (int r = 0; r < d; ++r)
        v(r) += noise.sigma_vel * rng.gaussian(kVelocity, t, i, r);
      s.velocities[i] = v;
    }
    s.anchor_positions.resize(topo.num_anchors());
    for (int k = 0; k < topo.num_anchors(); ++k)
      s.anchor_positions[k] = truth.position(anchors[k], t);
  }
  return stream;
}

std::vector<Vec> draw_initial_positions(const GroundTruth& truth,
                                        const FormationConfig& formation,
                                        const NoiseConfig& noise) {
  const CounterRng rng(noise.seed);
  const std::vector<int> free = formation.free_slots();
  std::vector<Vec> init(free.size());
  for (size_t i = 0; i < free.size(); ++i) {
    Vec p = truth.position(free[i], 0);
    for (int r = 0; r < truth.dim(); ++r)
      p(r) += noise.sigma_init * rng.gaussian(kInit, i, r);
    init[i] = p;
  }
  return init;
}

}  // namespace diesel
