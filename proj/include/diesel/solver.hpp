#pragma once

#include <utility>
#include <vector>

#include "diesel/problem.hpp"

namespace diesel {

// One per-round position broadcast.
struct BroadcastMsg {
  int sender = -1;
  Vec position;
  int round = 0;
};

// Snapshot of the broadcasts a node may read during one round.  position_of
// is the only way iterate data crosses node boundaries, which is what keeps
// the update local.
class Inbox {
 public:
  explicit Inbox(int round) : round_(round) {}

  // Throws SyncFault on duplicate sender or round mismatch.
  void put(BroadcastMsg msg);

  // Throws SyncFault when no message from this sender reached the barrier.
  const Vec& position_of(int vehicle) const;

  bool has(int vehicle) const;
  int round() const { return round_; }

  // Test instrumentation: when set, every sender id handed out through
  // position_of is recorded.
  mutable std::vector<int>* access_log = nullptr;

 private:
  int round_;
  std::vector<BroadcastMsg> msgs_;
};

// Variables owned by one vehicle: its position estimate plus local copies of
// the edge and anchor sphere variables for every incident measurement.  Both
// endpoints of an edge keep their own copy of y (in the canonical lo-hi
// orientation); the copies stay bitwise equal because each round computes
// them from the same broadcast data.
struct NodeState {
  int vehicle = -1;
  Vec p;
  std::vector<std::vector<Vec>> y;  // [local incident edge][tau]
  std::vector<std::vector<Vec>> w;  // [local anchor link][tau]
  double beta = 0.0;
  double lipschitz = 0.0;
};

// One node update of the projected gradient round: the p convex combination,
// then the sphere-projected y and w steps, all from round-kappa values.
// Returns the broadcast for round kappa + 1.
BroadcastMsg node_round(NodeState& state, const Inbox& inbox, const NetworkTopology& topo,
                        const MeasurementWindow& window, const WindowDeltas& deltas,
                        const Vec& tie_break);

// Node updates within a round may run concurrently; they read only the
// round's broadcast snapshot, so results are order-independent either way.
enum class ExecutionPolicy { sequential, parallel };

struct SolveReport {
  enum class StopReason { tolerance, max_iters };
  int iterations = 0;
  double final_cost = 0.0;
  std::vector<double> cost_trace;  // cost_trace[0] is the initial cost
  StopReason stop_reason = StopReason::max_iters;
};

// Synchronous round engine: broadcast, barrier, update every node.  The
// in-process barrier always delivers complete inboxes; a lossy transport
// would have to retry the barrier before calling node_round.
class SynchronousEngine {
 public:
  SynchronousEngine(const NetworkTopology& topo, const MeasurementWindow& window,
                    const StackedVariable& init, const SolverParams& params,
                    ExecutionPolicy policy = ExecutionPolicy::sequential);

  // One full round over all nodes.
  void step();

  int round() const { return round_; }
  const std::vector<NodeState>& states() const { return states_; }
  const WindowDeltas& deltas() const { return deltas_; }
  double lipschitz() const { return lipschitz_; }
  const Vec& tie_break() const { return tie_break_; }

  // Assemble the global stacked variable from the node states (edge blocks
  // taken from the lower endpoint's copy).
  StackedVariable gather() const;

 private:
  const NetworkTopology& topo_;
  const MeasurementWindow& window_;
  WindowDeltas deltas_;
  ExecutionPolicy policy_;
  double lipschitz_;
  Vec tie_break_;
  std::vector<NodeState> states_;
  std::vector<BroadcastMsg> outgoing_;
  int round_ = 0;
};

// Full window solve: projects the initialization onto the constraint set,
// runs synchronous rounds until the relative iterate change drops below
// rel_tol or the iteration budget runs out, and returns the final variable
// with a per-iteration cost trace.  Throws NumericalFault if an iterate
// stops being finite.
std::pair<StackedVariable, SolveReport> run_window(
    const NetworkTopology& topo, const MeasurementWindow& window, const StackedVariable& init,
    const SolverParams& params, ExecutionPolicy policy = ExecutionPolicy::sequential);

}  // namespace diesel
