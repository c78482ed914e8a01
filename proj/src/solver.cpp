#include "diesel/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "diesel/errors.hpp"

namespace diesel {

void Inbox::put(BroadcastMsg msg) {
  if (msg.round != round_)
    throw SyncFault("message for round " + std::to_string(msg.round) +
                    " delivered to round " + std::to_string(round_));
  for (const auto& m : msgs_)
    if (m.sender == msg.sender)
      throw SyncFault("duplicate broadcast from vehicle " + std::to_string(msg.sender));
  msgs_.push_back(std::move(msg));
}

const Vec& Inbox::position_of(int vehicle) const {
  for (const auto& m : msgs_) {
    if (m.sender == vehicle) {
      if (access_log) access_log->push_back(vehicle);
      return m.position;
    }
  }
  throw SyncFault("no broadcast from vehicle " + std::to_string(vehicle) + " in round " +
                  std::to_string(round_));
}

bool Inbox::has(int vehicle) const {
  for (const auto& m : msgs_)
    if (m.sender == vehicle) return true;
  return false;
}

BroadcastMsg node_round(NodeState& state, const Inbox& inbox, const NetworkTopology& topo,
                        const MeasurementWindow& window, const WindowDeltas& deltas,
                        const Vec& tie_break) {
  const int i = state.vehicle;
  const int W = window.window_len;
  const double L = state.lipschitz;
  const double keep = (L - 1.0) / L;
  const double step = 1.0 / L;

  const auto& edges = topo.incident_edges(i);
  const auto& links = topo.vehicle_links(i);

  // p accumulates neighbor and anchor terms at round-kappa values.
  Vec acc = zero_vec(topo.dim());
  for (size_t le = 0; le < edges.size(); ++le) {
    const int e = edges[le];
    const Edge& ed = topo.edge(e);
    const int j = (ed.lo == i) ? ed.hi : ed.lo;
    const double sign = topo.incidence_sign(e, i);
    const Vec& pj = inbox.position_of(j);
    for (int tau = 0; tau < W; ++tau)
      acc += pj + sign * (state.y[le][tau] - deltas.dv[e][tau]);
  }
  for (size_t ll = 0; ll < links.size(); ++ll) {
    const int l = links[ll];
    for (int tau = 0; tau < W; ++tau) acc += deltas.alpha[l][tau] + state.w[ll][tau];
  }
  const Vec new_p = state.beta * state.p + step * acc;

  // y and w move toward the round-kappa residual directions and are projected
  // back onto their spheres.  Both endpoints of an edge evaluate the exact
  // same expression on the same inputs, which keeps the two copies bitwise
  // equal.
  for (size_t le = 0; le < edges.size(); ++le) {
    const int e = edges[le];
    const Edge& ed = topo.edge(e);
    const int j = (ed.lo == i) ? ed.hi : ed.lo;
    const Vec& p_lo = (ed.lo == i) ? state.p : inbox.position_of(j);
    const Vec& p_hi = (ed.hi == i) ? state.p : inbox.position_of(j);
    for (int tau = 0; tau < W; ++tau) {
      const Vec pre = keep * state.y[le][tau] + step * (p_lo - p_hi + deltas.dv[e][tau]);
      state.y[le][tau] = project_to_sphere(pre, window.ranges[e][tau], tie_break);
    }
  }
  for (size_t ll = 0; ll < links.size(); ++ll) {
    const int l = links[ll];
    for (int tau = 0; tau < W; ++tau) {
      const Vec pre = keep * state.w[ll][tau] + step * (state.p - deltas.alpha[l][tau]);
      state.w[ll][tau] = project_to_sphere(pre, window.anchor_ranges[l][tau], tie_break);
    }
  }

  state.p = new_p;
  return BroadcastMsg{i, state.p, inbox.round() + 1};
}

SynchronousEngine::SynchronousEngine(const NetworkTopology& topo,
                                     const MeasurementWindow& window,
                                     const StackedVariable& init, const SolverParams& params,
                                     ExecutionPolicy policy)
    : topo_(topo),
      window_(window),
      deltas_(window_deltas(window, topo)),
      policy_(policy),
      lipschitz_(params.resolved_lipschitz(topo, window.window_len)),
      tie_break_(params.resolved_tie_break(topo.dim())) {
  window_.validate(topo_);
  const int W = window_.window_len;
  const std::vector<double> beta = beta_coefficients(topo_, W, lipschitz_);

  const StackedVariable z0 = projected(init, window_, topo_, tie_break_);
  states_.resize(topo_.num_vehicles());
  outgoing_.resize(topo_.num_vehicles());
  for (int i = 0; i < topo_.num_vehicles(); ++i) {
    NodeState& s = states_[i];
    s.vehicle = i;
    s.p = z0.p(i);
    s.beta = beta[i];
    s.lipschitz = lipschitz_;
    const auto& edges = topo_.incident_edges(i);
    s.y.resize(edges.size());
    for (size_t le = 0; le < edges.size(); ++le) {
      s.y[le].resize(W);
      for (int tau = 0; tau < W; ++tau) s.y[le][tau] = z0.y(edges[le], tau);
    }
    const auto& links = topo_.vehicle_links(i);
    s.w.resize(links.size());
    for (size_t ll = 0; ll < links.size(); ++ll) {
      s.w[ll].resize(W);
      for (int tau = 0; tau < W; ++tau) s.w[ll][tau] = z0.w(links[ll], tau);
    }
    outgoing_[i] = BroadcastMsg{i, s.p, 0};
  }
}

void SynchronousEngine::step() {
  const int n = topo_.num_vehicles();

  // Barrier: every node's round-kappa broadcast is in hand before any update.
  std::vector<Inbox> inboxes;
  inboxes.reserve(n);
  for (int i = 0; i < n; ++i) {
    Inbox box(round_);
    for (int j : topo_.neighbors(i)) box.put(outgoing_[j]);
    inboxes.push_back(std::move(box));
  }

  std::vector<BroadcastMsg> next(n);
  auto update = [&](int i) {
    next[i] = node_round(states_[i], inboxes[i], topo_, window_, deltas_, tie_break_);
  };

  if (policy_ == ExecutionPolicy::parallel && n > 1) {
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (int i = 0; i < n; ++i) workers.emplace_back(update, i);
    for (auto& t : workers) t.join();
  } else {
    for (int i = 0; i < n; ++i) update(i);
  }

  outgoing_ = std::move(next);
  ++round_;
}

StackedVariable SynchronousEngine::gather() const {
  const int W = window_.window_len;
  StackedVariable z(topo_, W);
  for (int i = 0; i < topo_.num_vehicles(); ++i) z.p(i) = states_[i].p;
  for (int i = 0; i < topo_.num_vehicles(); ++i) {
    const auto& edges = topo_.incident_edges(i);
    for (size_t le = 0; le < edges.size(); ++le) {
      const Edge& ed = topo_.edge(edges[le]);
      if (ed.lo != i) continue;  // lower endpoint's copy is canonical
      for (int tau = 0; tau < W; ++tau) z.y(edges[le], tau) = states_[i].y[le][tau];
    }
    const auto& links = topo_.vehicle_links(i);
    for (size_t ll = 0; ll < links.size(); ++ll)
      for (int tau = 0; tau < W; ++tau) z.w(links[ll], tau) = states_[i].w[ll][tau];
  }
  return z;
}

std::pair<StackedVariable, SolveReport> run_window(const NetworkTopology& topo,
                                                   const MeasurementWindow& window,
                                                   const StackedVariable& init,
                                                   const SolverParams& params,
                                                   ExecutionPolicy policy) {
  SynchronousEngine engine(topo, window, init, params, policy);

  SolveReport report;
  StackedVariable z = engine.gather();
  report.cost_trace.push_back(cost_stacked(z, engine.deltas(), topo));

  for (int k = 1; k <= params.max_iters; ++k) {
    engine.step();
    StackedVariable next = engine.gather();
    if (!next.all_finite())
      throw NumericalFault("non-finite iterate in run_window", k);
    report.cost_trace.push_back(cost_stacked(next, engine.deltas(), topo));
    report.iterations = k;

    const double change = (next.flat() - z.flat()).norm();
    const double scale = 1.0 + z.flat().norm();
    z = std::move(next);
    if (change <= params.rel_tol * scale) {
      report.stop_reason = SolveReport::StopReason::tolerance;
      break;
    }
    if (k == params.max_iters) report.stop_reason = SolveReport::StopReason::max_iters;
  }
  report.final_cost = report.cost_trace.back();
  return {std::move(z), report};
}

}  // namespace diesel
