#pragma once

#include <stdexcept>
#include <vector>

#include "bpsim/graph.hpp"
#include "bpsim/matrix.hpp"

namespace bpsim {

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-(node, commodity) backlogs. Destination rows are held at zero.
struct QueueState {
  QueueState() = default;
  QueueState(int nodes, int commodities, double slot_duration = 1.0);

  Matrix network;        // U
  Matrix transport;      // Q
  Matrix transport_cap;  // Q_max, +inf by default
  Matrix virtual_queue;  // Y
  double slot = 1.0;     // Delta
};

// Per-slot control quantities. offered/actual are L x C; admitted/auxiliary N x C.
struct Transfers {
  Matrix offered;    // mu
  Matrix actual;     // nu
  Matrix admitted;   // r
  Matrix auxiliary;  // gamma
};

// Turns offered rates into actual transfers that never remove more than the
// backlog. When the backlog is short, it is handed to outgoing links in
// decreasing order of offered rate, ties by link id.
Matrix resolve_transfers(const NetworkGraph& graph, const Matrix& backlog, const Matrix& offered,
                         double slot);
void resolve_transfers_into(const NetworkGraph& graph, const Matrix& backlog, const Matrix& offered,
                            double slot, Matrix& actual);

// U' = U - out + inflow + in, with inflow being exogenous arrivals or
// admissions. Returns the amount delivered to each commodity's destination.
std::vector<double> step_network_queues(const NetworkGraph& graph, QueueState& state,
                                        const Matrix& actual, const Matrix& inflow);

// Q' = min(Q - r + A, Q_max). Returns the amount dropped at each (n, c).
Matrix step_transport_queues(QueueState& state, const Matrix& admitted, const Matrix& arrivals);

// Y' = (Y - r)^+ + gamma.
void step_virtual_queues(QueueState& state, const Matrix& admitted, const Matrix& auxiliary);

}  // namespace bpsim
