#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bpsim/graph.hpp"
#include "bpsim/matrix.hpp"

namespace bpsim {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// f_n^(c)(u) = (1/z) * min over next hops k of u_k^(c). Destination rows and
// nodes without outgoing commodity-c links get 0.
Matrix bias_next_hop(const NetworkGraph& graph, const Matrix& backlog, double z);
void bias_next_hop_into(const NetworkGraph& graph, const Matrix& backlog, double z, Matrix& out);

// Minimum downstream sum of backlogs T*_n^(c) (excluding n itself), by
// iterative Bellman-Ford with the receive-node backlog as link cost.
// Unreachable pairs hold kUnreachable.
// Link endpoints in Bellman-Ford relaxation order.
struct RelaxEdge {
  NodeId from;
  NodeId to;
};

struct DownstreamSums {
  Matrix sums;
  int rounds = 0;           // max relaxation rounds over commodities
  int unreachable_pairs = 0;
};
DownstreamSums min_downstream_sums(const NetworkGraph& graph, const Matrix& backlog);
void min_downstream_sums_into(const NetworkGraph& graph, const Matrix& backlog, DownstreamSums& out);

// f = T* / z.
Matrix bias_min_downstream(const NetworkGraph& graph, const Matrix& backlog, double z);

// Static bias B * hopcount(n -> dest(c)) within L^(c), by breadth-first search.
Matrix bias_shortest_path(const NetworkGraph& graph, double per_link_cost);

// 2 R_max d_in / eps_min: smallest normalizer z for which the next-hop and
// min-downstream biases keep throughput optimality at margin eps_min.
double min_z(double max_rate, int in_degree, double eps_min);

// General QSI-dependent bias: f_n^(c)(u) = sum_k eta_nk^(c)(u) u_k^(c) / z.
// The weight rule returns (k, eta) pairs for a given (n, c, u).
struct BiasWeight {
  NodeId node;
  double weight;
};
using WeightRule = std::function<std::vector<BiasWeight>(const NetworkGraph&, const Matrix&, NodeId,
                                                         CommodityId)>;
Matrix general_bias(const NetworkGraph& graph, const Matrix& backlog, const WeightRule& rule, double z);

// Tie-averaged weights over the minimizing next hops.
WeightRule next_hop_weights();
// Tie-averaged weights over the nodes of all minimizing downstream paths
// (exhaustive path enumeration; only meant for small graphs).
WeightRule min_downstream_weights();

// Pluggable bias description used by policies and scenario files.
struct BiasSpec {
  enum class Kind { zero, next_hop, min_downstream, shortest_path, composite, custom };
  Kind kind = Kind::zero;
  double z = 1.0;             // next_hop / min_downstream normalizer
  double per_link_cost = 0.0; // shortest_path B
  std::vector<BiasSpec> members;
  std::function<Matrix(const NetworkGraph&, const Matrix&)> custom;

  static BiasSpec zero() { return {}; }
  static BiasSpec next_hop(double z);
  static BiasSpec min_downstream(double z);
  static BiasSpec shortest_path(double per_link_cost);
  static BiasSpec composite(std::vector<BiasSpec> members);

  void validate() const;
  // True when the bias depends on the queue state.
  bool is_dynamic() const;
};

// Evaluators that split a BiasSpec into its queue-dependent part (evaluated
// every slot) and its static part (evaluated once).
class BiasEvaluator {
 public:
  BiasEvaluator(const NetworkGraph& graph, BiasSpec spec);

  const BiasSpec& spec() const { return spec_; }
  bool has_static() const { return has_static_; }
  bool has_dynamic() const { return has_dynamic_; }
  const Matrix& static_bias() const { return static_; }

  // Queue-dependent bias for the given backlog. Returns a reference to an
  // internal buffer valid until the next call.
  const Matrix& dynamic_bias(const Matrix& backlog);

  // Number of evaluations that found unreachable (node, commodity) pairs.
  int unreachable_reports() const { return unreachable_reports_; }

 private:
  void accumulate(const BiasSpec& s, const Matrix& backlog);

  const NetworkGraph* graph_;
  BiasSpec spec_;
  bool has_static_ = false;
  bool has_dynamic_ = false;
  Matrix static_;
  Matrix dynamic_;
  Matrix scratch_;
  DownstreamSums sums_;
  std::vector<std::vector<RelaxEdge>> order_;
  int unreachable_reports_ = 0;
};

}  // namespace bpsim
