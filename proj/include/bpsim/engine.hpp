#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bpsim/graph.hpp"
#include "bpsim/matrix.hpp"
#include "bpsim/policy.hpp"
#include "bpsim/queueing.hpp"
#include "bpsim/rate_model.hpp"
#include "bpsim/traffic.hpp"

namespace bpsim {

struct RunConfig {
  long slots = 100000;
  long warmup = -1;  // -1 = 10% of slots
  std::uint64_t seed = 1;
  double slot_duration = 1.0;
  std::optional<Matrix> initial_backlog;
  std::optional<Matrix> transport_cap;  // Q_max, +inf when absent
  long series_stride = 0;               // record total backlog every k slots (0 = off)
  std::string state_dump_path;          // CSV dump of (slot, node, commodity, U, Q, Y)
  long state_dump_stride = 1;

  long effective_warmup() const { return warmup < 0 ? slots / 10 : warmup; }
};

struct RunMetrics {
  long slots = 0;
  long warmup = 0;
  std::uint64_t seed = 0;

  double avg_total_backlog = 0.0;            // after warmup
  std::vector<double> per_commodity_backlog; // after warmup
  double trailing_avg_backlog = 0.0;         // last 10% of slots
  double max_backlog = 0.0;                  // largest total backlog seen

  std::vector<double> delivered;             // whole run, per commodity
  std::vector<double> delivered_rate;        // after warmup, per commodity per slot
  Matrix injected;                           // whole run: arrivals (or admissions) into the network layer
  double initial_total_backlog = 0.0;
  double final_total_backlog = 0.0;

  bool flow_control = false;
  Matrix avg_admitted_rate;                  // r bar, after warmup
  Matrix avg_auxiliary;                      // gamma bar, after warmup
  double utility_at_rbar = 0.0;
  double utility_at_gammabar = 0.0;
  double avg_transport_backlog = 0.0;
  double dropped_total = 0.0;

  double max_arrival = 0.0;                  // realized per-slot maximum
  int unreachable_reports = 0;
  std::vector<double> backlog_series;        // total backlog every series_stride slots
  double runtime_ms = 0.0;

  // Sum of injected minus delivered minus the backlog change; zero up to rounding.
  double conservation_error() const;
};

// Runs the slotted closed loop. Throws InvariantViolation with the slot
// index when a queue invariant breaks.
RunMetrics run(const NetworkGraph& graph, const RateModel& rates, const ArrivalSpec& arrivals,
               const PolicySpec& policy, const RunConfig& config);

struct LittlesLawDelay {
  std::vector<double> per_commodity;  // NaN where throughput is zero
  std::vector<bool> defined;
  double aggregate = 0.0;             // NaN when total throughput is zero
};
LittlesLawDelay littles_law_delay(const RunMetrics& metrics);

}  // namespace bpsim
