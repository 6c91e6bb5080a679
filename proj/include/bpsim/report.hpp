#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bpsim/plot.hpp"
#include "bpsim/scenario.hpp"

namespace bpsim {

// Replication mean of one metric per (policy label, sweep value), in the
// order the policies first appear.
struct Curve {
  std::string policy;
  std::vector<double> values;
  std::vector<double> mean;
  std::vector<double> stderr_;  // standard error over replications; 0 with one replication
};
using MetricFn = double (*)(const ResultRow&);
double row_backlog(const ResultRow& row);
double row_utility(const ResultRow& row);
std::vector<Curve> curves(const std::vector<ResultRow>& rows, MetricFn metric);
const Curve* find_curve(const std::vector<Curve>& cs, const std::string& policy);

// Largest ratio policy/reference over the shared sweep values.
double max_ratio(const Curve& policy, const Curve& reference);

// Human-readable summary: ratios to BP for delay sweeps, utility and
// backlog per M for tradeoff sweeps.
std::string headline(const Scenario& scenario, const std::vector<ResultRow>& rows);
// Machine-readable form of the same numbers.
std::string headline_json(const Scenario& scenario, const std::vector<ResultRow>& rows);

PlotSpec scenario_plot(const Scenario& scenario, const std::vector<ResultRow>& rows);

struct MarginReport {
  bool routable = false;
  double eps = 0.0;
  bool eps_at_lower_bound = false;
  std::vector<int> disconnected;
  int in_degree = 0;
  double max_rate = 0.0;
  double z = 0.0;
  double eps_z = 0.0;                 // largest entry
  std::optional<double> min_z;        // 2 R_max d_in / eps when eps > 0
  std::optional<double> bound;     // bound when the sufficient condition holds
  std::string bound_note;
  double lp_duality_gap = 0.0;
};
MarginReport margin_report(const Scenario& scenario);
std::string format_margin_report(const MarginReport& report);

}  // namespace bpsim
