#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpsim/graph.hpp"
#include "bpsim/lp.hpp"
#include "bpsim/matrix.hpp"
#include "bpsim/rate_model.hpp"
#include "bpsim/utility.hpp"

namespace bpsim {

// Expected per-link rate of a single-action rate model.
std::vector<double> expected_capacities(const NetworkGraph& graph, const RateModel& rates);

// Mask of pairs (n, c) with lambda > 0.
Matrix positive_mask(const Matrix& lambda);
// Mask of every (n, c) with n != dest(c).
Matrix non_destination_mask(const NetworkGraph& graph);

struct MarginResult {
  bool feasible = false;       // lambda + eps * mask is routable with eps >= 0
  bool connected = true;
  double eps = 0.0;            // largest uniform margin; lower-bounded by -min active lambda
  bool eps_at_lower_bound = false;
  Matrix flows;                // L x C certifying flow
  std::vector<CommodityId> disconnected;  // commodities with an active source that cannot reach dest
  LinearProgram lp;
  LpResult lp_result;
};

// Largest eps such that lambda + eps * mask is routable under the link
// capacities. The mask defaults to lambda > 0.
MarginResult max_margin(const NetworkGraph& graph, const std::vector<double>& capacities, const Matrix& lambda,
                        const std::optional<Matrix>& active = std::nullopt);

// Checks conservation and capacity of a flow against lambda + eps * mask.
double flow_violation(const NetworkGraph& graph, const std::vector<double>& capacities, const Matrix& flows,
                      const Matrix& demand);

struct ThetaOptimalResult {
  bool feasible = false;
  Matrix rates;           // N x C admitted rates
  double utility = 0.0;   // sum of h(r)
  int cuts = 0;
  double gap = 0.0;       // final outer-approximation gap
};

// maximize sum h(r) s.t. r + theta routable, 0 <= r <= lambda. Concave
// utilities are handled with tangent cutting planes.
ThetaOptimalResult theta_optimal_rates(const NetworkGraph& graph, const std::vector<double>& capacities,
                                       const Matrix& lambda, const Matrix& theta, const UtilitySpec& utility,
                                       double tolerance = 1e-9, int max_cuts = 2000);

// 2 R_max L^(c) / z per (n, c); zero for z = +inf.
Matrix eps_z(const NetworkGraph& graph, double max_rate, double z);

// Splits a uniform routable margin eps_max into (eps, delta) with
// eps = eps_z + slack / 2 and delta = slack / 2, slack = eps_max - eps_z.
struct MarginSplit {
  Matrix eps;
  Matrix delta;
  bool valid = false;  // slack > 0 on every non-destination pair
};
MarginSplit split_margin(const NetworkGraph& graph, double eps_max, const Matrix& ez);

}  // namespace bpsim
