#include "bpsim/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bpsim {

namespace {

constexpr double kSlack = 1e-9;

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(std::string(what) + ": matrix has the wrong shape");
  }
}

}  // namespace

QueueState::QueueState(int nodes, int commodities, double slot_duration)
    : network(nodes, commodities),
      transport(nodes, commodities),
      transport_cap(nodes, commodities, std::numeric_limits<double>::infinity()),
      virtual_queue(nodes, commodities),
      slot(slot_duration) {
  if (!(slot_duration > 0.0)) throw std::invalid_argument("queue state: slot duration must be positive");
}

void resolve_transfers_into(const NetworkGraph& graph, const Matrix& backlog, const Matrix& offered,
                            double slot, Matrix& actual) {
  const int nodes = graph.num_nodes();
  const int commodities = graph.num_commodities();
  check_shape(backlog, nodes, commodities, "resolve_transfers");
  check_shape(offered, graph.num_links(), commodities, "resolve_transfers");
  if (actual.rows() != offered.rows() || actual.cols() != offered.cols()) {
    actual = Matrix(offered.rows(), offered.cols());
  }

  const int links = graph.num_links();
  std::copy(offered.values().begin(), offered.values().end(), actual.values().begin());

  // Offered demand per (node, commodity), from the links' sending ends.
  thread_local std::vector<double> demand;
  demand.assign(static_cast<std::size_t>(nodes) * commodities, 0.0);
  for (LinkId l = 0; l < links; ++l) {
    const auto row = offered.row(l);
    double* d = &demand[static_cast<std::size_t>(graph.link(l).from) * commodities];
    for (CommodityId c = 0; c < commodities; ++c) {
      if (row[c] < 0.0) throw std::invalid_argument("resolve_transfers: negative offered rate");
      d[c] += row[c];
    }
  }

  std::vector<LinkId> order;
  for (NodeId n = 0; n < nodes; ++n) {
    for (CommodityId c = 0; c < commodities; ++c) {
      const double u = backlog(n, c);
      if (u < 0.0) throw std::invalid_argument("resolve_transfers: negative backlog");
      if (demand[static_cast<std::size_t>(n) * commodities + c] * slot <= u) continue;
      auto out = graph.out_links(n);
      order.assign(out.begin(), out.end());
      std::stable_sort(order.begin(), order.end(), [&](LinkId x, LinkId y) {
        if (offered(x, c) != offered(y, c)) return offered(x, c) > offered(y, c);
        return x < y;
      });
      double remaining = u;
      for (LinkId l : order) {
        const double give = std::min(offered(l, c), remaining / slot);
        actual(l, c) = give;
        remaining = std::max(0.0, remaining - give * slot);
      }
    }
  }
}

Matrix resolve_transfers(const NetworkGraph& graph, const Matrix& backlog, const Matrix& offered,
                         double slot) {
  Matrix actual(offered.rows(), offered.cols());
  resolve_transfers_into(graph, backlog, offered, slot, actual);
  return actual;
}

std::vector<double> step_network_queues(const NetworkGraph& graph, QueueState& state,
                                        const Matrix& actual, const Matrix& inflow) {
  const int nodes = graph.num_nodes();
  const int commodities = graph.num_commodities();
  check_shape(state.network, nodes, commodities, "step_network_queues");
  check_shape(actual, graph.num_links(), commodities, "step_network_queues");
  check_shape(inflow, nodes, commodities, "step_network_queues");
  const double dt = state.slot;
  Matrix& u = state.network;
  std::vector<double> delivered(commodities, 0.0);

  for (LinkId l = 0; l < graph.num_links(); ++l) {
    const Link& k = graph.link(l);
    for (CommodityId c = 0; c < commodities; ++c) {
      const double moved = actual(l, c) * dt;
      if (moved == 0.0) continue;
      if (moved < 0.0) throw InvariantViolation("negative transfer on link " + std::to_string(l));
      if (!graph.allowed(c, l)) {
        throw InvariantViolation("transfer of commodity " + std::to_string(c) +
                                 " on disallowed link " + std::to_string(l));
      }
      u(k.from, c) -= moved;
      if (k.to == graph.destination(c)) {
        delivered[c] += moved;
      } else {
        u(k.to, c) += moved;
      }
    }
  }
  for (NodeId n = 0; n < nodes; ++n) {
    for (CommodityId c = 0; c < commodities; ++c) {
      if (n == graph.destination(c)) {
        // Data at its destination leaves the network layer.
        delivered[c] += inflow(n, c) * dt;
        u(n, c) = 0.0;
        continue;
      }
      double v = u(n, c) + inflow(n, c) * dt;
      if (v < -kSlack) {
        throw InvariantViolation("network backlog went negative at node " + std::to_string(n) +
                                 ", commodity " + std::to_string(c));
      }
      u(n, c) = std::max(0.0, v);
    }
  }
  return delivered;
}

Matrix step_transport_queues(QueueState& state, const Matrix& admitted, const Matrix& arrivals) {
  Matrix& q = state.transport;
  check_shape(admitted, q.rows(), q.cols(), "step_transport_queues");
  check_shape(arrivals, q.rows(), q.cols(), "step_transport_queues");
  Matrix dropped(q.rows(), q.cols());
  const double dt = state.slot;
  for (std::size_t n = 0; n < q.rows(); ++n) {
    for (std::size_t c = 0; c < q.cols(); ++c) {
      const double out = admitted(n, c) * dt;
      if (out > q(n, c) + kSlack) {
        throw std::invalid_argument("step_transport_queues: admission exceeds transport backlog");
      }
      const double next = std::max(0.0, q(n, c) - out) + arrivals(n, c) * dt;
      const double cap = state.transport_cap(n, c);
      if (next > cap) {
        dropped(n, c) = next - cap;
        q(n, c) = cap;
      } else {
        q(n, c) = next;
      }
    }
  }
  return dropped;
}

void step_virtual_queues(QueueState& state, const Matrix& admitted, const Matrix& auxiliary) {
  Matrix& y = state.virtual_queue;
  check_shape(admitted, y.rows(), y.cols(), "step_virtual_queues");
  check_shape(auxiliary, y.rows(), y.cols(), "step_virtual_queues");
  const double dt = state.slot;
  for (std::size_t n = 0; n < y.rows(); ++n) {
    for (std::size_t c = 0; c < y.cols(); ++c) {
      y(n, c) = std::max(0.0, y(n, c) - admitted(n, c) * dt) + auxiliary(n, c) * dt;
    }
  }
}

}  // namespace bpsim
