#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bpsim/bias.hpp"
#include "bpsim/graph.hpp"
#include "bpsim/matrix.hpp"
#include "bpsim/rate_model.hpp"
#include "bpsim/utility.hpp"

namespace bpsim {

enum class Algorithm { bp, bpbias, bpnxt, bpmin, bpnxtbias, bpminbias, custom };

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct FlowControlSpec {
  double M = 1.0;
  Matrix r_max;                         // N x C admission caps
  std::vector<UtilitySpec> utilities;  // row-major N x C; empty = log for every pair
  const UtilitySpec& utility(NodeId n, CommodityId c) const;
  void validate(int nodes, int commodities) const;
};

struct PolicySpec {
  Algorithm algorithm = Algorithm::bp;
  double z = 1.0;
  double per_link_cost = 0.0;
  BiasSpec bias;
  std::optional<FlowControlSpec> flow_control;

  // Builds the bias of a named algorithm from (z, B).
  static PolicySpec make(Algorithm algorithm, double z = 1.0, double per_link_cost = 0.0);
  // Short display label, e.g. "BPnxt(z=1)".
  std::string label() const;
};

struct BackpressureTable {
  Matrix W;                      // L x C, -inf off L^(c)
  std::vector<int> c_star;       // -1 when no commodity may use the link
  std::vector<double> W_star;    // (W_{c*})^+
};

// W_ab^(c) = (U_a + f_a + sp_a) - (U_b + f_b + sp_b) on L^(c). Any infinite
// bias term gives W = -inf. static_bias may be null.
BackpressureTable compute_backpressure(const NetworkGraph& graph, const Matrix& backlog, const Matrix& bias,
                                       const Matrix* static_bias = nullptr);
void compute_backpressure_into(const NetworkGraph& graph, const Matrix& backlog, const Matrix& bias,
                               const Matrix* static_bias, BackpressureTable& out);

// argmax_I sum_l W*_l R(s, I, l); ties go to the first action.
int allocate_resources(const RateModel& rates, int state, const BackpressureTable& table);

// Full link rate to c* on links with W* > 0.
Matrix route(const BackpressureTable& table, std::span<const double> link_rates, int commodities);
void route_into(const BackpressureTable& table, std::span<const double> link_rates, Matrix& mu);

// Closed-form maximizer of M h(g) - Y g Delta over [0, r_max].
double auxiliary_rate(const UtilitySpec& h, double M, double Y, double r_max, double slot);

// r = min(Q / Delta, r_max) where Y > U, else 0; gamma from auxiliary_rate.
std::pair<Matrix, Matrix> flow_control_admit(const Matrix& transport, const Matrix& backlog,
                                             const Matrix& virtual_queue, const FlowControlSpec& spec,
                                             double slot);
void flow_control_admit_into(const Matrix& transport, const Matrix& backlog, const Matrix& virtual_queue,
                             const FlowControlSpec& spec, double slot, Matrix& admitted, Matrix& auxiliary);

// N Bbar / beta_z for the supplied (eps, delta). Nodes that are the
// destination of every commodity hold no backlog and are left out of Bbar;
// beta_z is the minimum over non-destination (n, c) of eps + delta - eps_z.
// Throws std::invalid_argument when eps < eps_z somewhere, when beta_z <= 0,
// or when some arrival cap is unbounded.
struct BacklogBound {
  double N_Bbar = 0.0;
  double beta = 0.0;
  double bound = 0.0;
};
BacklogBound backlog_bound(const NetworkGraph& graph, const RateModel& rates, const Matrix& arrival_caps,
                             const Matrix& eps, const Matrix& delta, double z);

}  // namespace bpsim
