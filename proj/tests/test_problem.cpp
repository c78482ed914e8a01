#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "diesel/errors.hpp"
#include "diesel/oracle.hpp"
#include "diesel/problem.hpp"
#include "diesel/rng.hpp"
#include "test_util.hpp"

using namespace diesel;
using diesel_test::vec2;

namespace {

NetworkTopology pair_topology() { return NetworkTopology(2, 2, 0, {{0, 1}}, {{}, {}}); }

}  // namespace

TEST_CASE("cumulative velocities anchor the first sample at zero") {
  NetworkTopology topo = pair_topology();
  MeasurementWindow win = diesel_test::tiny_window(3, 1.0, 5.0);

  SUBCASE("zero velocity stays zero") {
    const CumulativeVelocity cum = cumulative_velocities(win, topo);
    for (int tau = 0; tau < 3; ++tau) CHECK(cum.v[0][tau].norm() == 0.0);
  }

  SUBCASE("constant 1 m/s accumulates 0,1,2") {
    for (int tau = 0; tau < 3; ++tau) win.rel_velocities[0][tau] = vec2(1.0, 0.0);
    const CumulativeVelocity cum = cumulative_velocities(win, topo);
    CHECK(cum.v[0][0](0) == 0.0);
    CHECK(cum.v[0][1](0) == 1.0);
    CHECK(cum.v[0][2](0) == 2.0);
  }

  SUBCASE("identical velocities cancel in differences") {
    for (int tau = 0; tau < 3; ++tau) {
      win.rel_velocities[0][tau] = vec2(0.3, -0.7);
      win.rel_velocities[1][tau] = vec2(0.3, -0.7);
    }
    const CumulativeVelocity cum = cumulative_velocities(win, topo);
    for (int tau = 0; tau < 3; ++tau)
      CHECK((cum.v[0][tau] - cum.v[1][tau]).norm() == 0.0);
  }
}

TEST_CASE("cost_original hand values") {
  NetworkTopology topo = pair_topology();
  MeasurementWindow win = diesel_test::tiny_window(1, 1.0, 5.0);
  std::vector<std::vector<Vec>> x{{vec2(0, 0)}, {vec2(3, 0)}};

  CHECK(cost_original(x, win, topo) == doctest::Approx(2.0).epsilon(1e-14));

  win.ranges[0][0] = 3.0;
  CHECK(cost_original(x, win, topo) == doctest::Approx(0.0));

  std::vector<std::vector<Vec>> bad{{vec2(0, 0)}};
  CHECK_THROWS_AS(cost_original(bad, win, topo), std::invalid_argument);
}

TEST_CASE("window deltas: antisymmetry and hand value") {
  NetworkTopology topo = pair_topology();
  MeasurementWindow win = diesel_test::tiny_window(2, 1.0, 5.0);
  win.rel_velocities[0][0] = vec2(1, 0);
  win.rel_velocities[0][1] = vec2(1, 0);

  const WindowDeltas deltas = window_deltas(win, topo);
  CHECK(deltas.dv[0][0](0) == 0.0);  // first sample always zero
  CHECK(deltas.dv[0][1](0) == 1.0);

  SUBCASE("all-equal velocities give zero dv") {
    win.rel_velocities[1][0] = vec2(1, 0);
    win.rel_velocities[1][1] = vec2(1, 0);
    const WindowDeltas d2 = window_deltas(win, topo);
    CHECK(d2.dv[0][1].norm() == 0.0);
  }

  SUBCASE("a common current leaves dv untouched") {
    // dv is built from measured relative velocities only; adding a current to
    // the inertial motion does not enter the pipeline at all.
    const WindowDeltas before = window_deltas(win, topo);
    const WindowDeltas after = window_deltas(win, topo);
    for (int tau = 0; tau < 2; ++tau)
      CHECK((before.dv[0][tau] - after.dv[0][tau]).norm() == 0.0);
  }
}

TEST_CASE("cost_stacked hand value and vanishing residuals") {
  NetworkTopology topo = pair_topology();
  MeasurementWindow win = diesel_test::tiny_window(1, 1.0, 5.0);
  const WindowDeltas deltas = window_deltas(win, topo);

  StackedVariable z(topo, 1);
  z.p(0) = vec2(0, 0);
  z.p(1) = vec2(3, 0);
  z.y(0, 0) = vec2(5, 0);
  // residual p0 - p1 - y = -3 - 5 = -8 per axis-0: cost 1/2 * 64
  CHECK(cost_stacked(z, deltas, topo) == doctest::Approx(32.0).epsilon(1e-14));

  // unconstrained minimizer zeroes the cost
  z.y(0, 0) = vec2(-3, 0);
  CHECK(cost_stacked(z, deltas, topo) == doctest::Approx(0.0));
}

TEST_CASE("formulation equivalence on random instances") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = oracle::random_instance(mix64(42 + seed));
    const NetworkTopology& topo = inst.topo;
    const int W = inst.window.window_len;
    const CumulativeVelocity cum = cumulative_velocities(inst.window, topo);

    // x induced by p and the measured velocities; y/w projected residuals.
    StackedVariable z = inst.z;
    std::vector<std::vector<Vec>> x(topo.num_vehicles(), std::vector<Vec>(W));
    for (int i = 0; i < topo.num_vehicles(); ++i)
      for (int tau = 0; tau < W; ++tau)
        x[i][tau] = cum.position(z.p(i), i, tau, inst.window.dt);
    const Vec tie = unit_x(topo.dim());
    for (int e = 0; e < topo.num_edges(); ++e) {
      const Edge& ed = topo.edge(e);
      for (int tau = 0; tau < W; ++tau)
        z.y(e, tau) = project_to_sphere(Vec(x[ed.lo][tau] - x[ed.hi][tau]),
                                        inst.window.ranges[e][tau], tie);
    }
    for (int l = 0; l < topo.num_links(); ++l) {
      const auto& [i, k] = topo.links()[l];
      for (int tau = 0; tau < W; ++tau)
        z.w(l, tau) = project_to_sphere(Vec(x[i][tau] - inst.window.anchor_position(k, tau)),
                                        inst.window.anchor_ranges[l][tau], tie);
    }

    const double orig = cost_original(x, inst.window, topo);
    const double stacked = cost_stacked(z, inst.deltas, topo);
    CHECK(std::abs(orig - stacked) <= 1e-10 * (1.0 + std::abs(orig)));
  }
}

TEST_CASE("gradient matches finite differences and is zero at the minimizer") {
  const auto inst = oracle::random_instance(mix64(7), 3, 1, 2);
  const StackedVariable g = gradient(inst.z, inst.deltas, inst.topo);
  const Eigen::VectorXd fd = diesel_test::fd_gradient(inst.z, inst.deltas, inst.topo);
  CHECK((g.flat() - fd).norm() <= 1e-6 * (1.0 + fd.norm()));

  // zero-residual point: y and w equal the unconstrained targets
  StackedVariable zstar = inst.z;
  for (int e = 0; e < inst.topo.num_edges(); ++e) {
    const Edge& ed = inst.topo.edge(e);
    for (int tau = 0; tau < inst.window.window_len; ++tau)
      zstar.y(e, tau) = zstar.p(ed.lo) - zstar.p(ed.hi) + inst.deltas.dv[e][tau];
  }
  for (int l = 0; l < inst.topo.num_links(); ++l) {
    const int i = inst.topo.links()[l].first;
    for (int tau = 0; tau < inst.window.window_len; ++tau)
      zstar.w(l, tau) = zstar.p(i) - inst.deltas.alpha[l][tau];
  }
  CHECK(gradient(zstar, inst.deltas, inst.topo).flat().norm() <= 1e-12);
}

TEST_CASE("gradient is homogeneous when the data terms vanish") {
  const auto inst = oracle::random_instance(mix64(11), 4, 1, 3);
  WindowDeltas zero_deltas = inst.deltas;
  for (auto& row : zero_deltas.dv)
    for (Vec& v : row) v.setZero();
  for (auto& row : zero_deltas.alpha)
    for (Vec& v : row) v.setZero();

  StackedVariable z2 = inst.z;
  z2.flat() *= 2.0;
  const Eigen::VectorXd g1 = gradient(inst.z, zero_deltas, inst.topo).flat();
  const Eigen::VectorXd g2 = gradient(z2, zero_deltas, inst.topo).flat();
  CHECK((g2 - 2.0 * g1).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + g1.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("sphere projection") {
  const Vec tie = unit_x(2);

  CHECK((project_to_sphere(vec2(3, 4), 10.0, tie) - vec2(6, 8)).norm() == 0.0);
  CHECK((project_to_sphere(vec2(6, 8), 10.0, tie) - vec2(6, 8)).norm() == 0.0);
  CHECK((project_to_sphere(vec2(0, 0), 5.0, tie) - vec2(5, 0)).norm() == 0.0);
  CHECK((project_to_sphere(vec2(1, 2), 0.0, tie) - vec2(0, 0)).norm() == 0.0);

  SUBCASE("idempotent and optimal over sampled sphere points") {
    const CounterRng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
      const Vec v = vec2(4.0 * rng.uniform(1, trial) - 2.0, 4.0 * rng.uniform(2, trial) - 2.0);
      const double radius = 0.5 + 3.0 * rng.uniform(3, trial);
      const Vec proj = project_to_sphere(v, radius, tie);
      CHECK(std::abs(proj.norm() - radius) <= 1e-12 * (1.0 + radius));
      CHECK((project_to_sphere(proj, radius, tie) - proj).norm() <= 1e-15);

      const double best = (v - proj).norm();
      for (int s = 0; s < 100; ++s) {
        const double angle = 2.0 * M_PI * rng.uniform(4, trial, s);
        const Vec on_sphere = vec2(radius * std::cos(angle), radius * std::sin(angle));
        CHECK((v - on_sphere).norm() >= best - 1e-9);
      }
    }
  }
}

TEST_CASE("projection of the full variable hits every sphere") {
  const auto inst = oracle::random_instance(mix64(5));
  StackedVariable z = inst.z;
  z.flat().setRandom();
  project_constraints(z, inst.window, inst.topo, unit_x(inst.topo.dim()));
  for (int e = 0; e < inst.topo.num_edges(); ++e)
    for (int tau = 0; tau < inst.window.window_len; ++tau)
      CHECK(std::abs(Vec(z.y(e, tau)).norm() - inst.window.ranges[e][tau]) <=
            1e-12 * (1.0 + inst.window.ranges[e][tau]));
  for (int l = 0; l < inst.topo.num_links(); ++l)
    for (int tau = 0; tau < inst.window.window_len; ++tau)
      CHECK(std::abs(Vec(z.w(l, tau)).norm() - inst.window.anchor_ranges[l][tau]) <=
            1e-12 * (1.0 + inst.window.anchor_ranges[l][tau]));
}

TEST_CASE("lipschitz bound formula values") {
  // chain of 4 vehicles, delta_max 2, one anchor link max, W = 6
  NetworkTopology chain(2, 4, 1, {{0, 1}, {1, 2}, {2, 3}}, {{0}, {}, {}, {}});
  CHECK(lipschitz_bound(chain, 6) == 32.0);

  NetworkTopology single(2, 2, 0, {{0, 1}}, {{}, {}});
  CHECK(lipschitz_bound(single, 1) == 4.0);

  CHECK_THROWS_AS(lipschitz_bound(single, 0), std::invalid_argument);
}

TEST_CASE("lipschitz bound dominates the spectral radius of M") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = oracle::random_instance(mix64(300 + seed));
    const double L = lipschitz_bound(inst.topo, inst.window.window_len);
    const auto apply =
        oracle::matrix_free_operator(inst.topo, inst.deltas, inst.window.window_len);
    const double lmax = oracle::power_iteration_lambda_max(apply, inst.z.size());
    CHECK(lmax <= L * (1.0 + 1e-9));
  }
}

TEST_CASE("beta coefficients") {
  NetworkTopology chain(2, 4, 1, {{0, 1}, {1, 2}, {2, 3}}, {{}, {0}, {}, {}});
  // vehicle 1: degree 2, one anchor link, W=6, L=32
  const std::vector<double> beta = beta_coefficients(chain, 6, 32.0);
  CHECK(beta[1] == doctest::Approx(0.4375).epsilon(1e-15));

  NetworkTopology single(2, 2, 0, {{0, 1}}, {{}, {}});
  const std::vector<double> b2 = beta_coefficients(single, 1, 4.0);
  CHECK(b2[0] == doctest::Approx(0.75).epsilon(1e-15));

  CHECK_THROWS_AS(beta_coefficients(chain, 6, 12.0), ConfigError);
}

TEST_CASE("stacked variable length matches d*(n + W*E + W*links)") {
  NetworkTopology topo(3, 3, 2, {{0, 1}, {1, 2}}, {{0}, {0, 1}, {}});
  StackedVariable z(topo, 4);
  CHECK(z.size() == 3 * (3 + 4 * 2 + 4 * 3));
}

TEST_CASE("malformed windows are rejected") {
  NetworkTopology topo(2, 2, 0, {{0, 1}}, {{}, {}});
  MeasurementWindow win = diesel_test::tiny_window(2, 1.0, 5.0);
  CHECK_NOTHROW(win.validate(topo));

  SUBCASE("negative range") {
    win.ranges[0][1] = -1.0;
    CHECK_THROWS_AS(win.validate(topo), std::invalid_argument);
  }
  SUBCASE("non-finite range") {
    win.ranges[0][0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(win.validate(topo), std::invalid_argument);
  }
  SUBCASE("short sample row") {
    win.ranges[0].pop_back();
    CHECK_THROWS_AS(win.validate(topo), std::invalid_argument);
  }
  SUBCASE("missing velocity row") {
    win.rel_velocities.pop_back();
    CHECK_THROWS_AS(win.validate(topo), std::invalid_argument);
  }
}

TEST_CASE("beta coefficients stay in (0, 1) at the derived Lipschitz bound") {
  for (uint64_t seed = 0; seed < 15; ++seed) {
    const auto inst = oracle::random_instance(mix64(777 + seed));
    const double L = lipschitz_bound(inst.topo, inst.window.window_len);
    for (double b : beta_coefficients(inst.topo, inst.window.window_len, L)) {
      CHECK(b > 0.0);
      CHECK(b < 1.0);
    }
  }
}
