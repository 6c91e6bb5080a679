#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bpsim/graph.hpp"
#include "bpsim/rate_model.hpp"

namespace bpsim {

// Per-slot arrival pmf in integer units: pmf[k] = Pr[A = k].
struct ArrivalPmf {
  NodeId node = 0;
  CommodityId commodity = 0;
  std::vector<double> pmf;
};

// Truncated controlled Markov chain on integer queue lengths. Only
// non-destination (n, c) pairs carry a queue.
class MdpSpec {
 public:
  MdpSpec(std::shared_ptr<const NetworkGraph> graph, std::shared_ptr<const RateModel> rates, int queue_cap,
          std::vector<ArrivalPmf> arrivals);

  const NetworkGraph& graph() const { return *graph_; }
  const RateModel& rates() const { return *rates_; }
  int queue_cap() const { return cap_; }
  const std::vector<ArrivalPmf>& arrivals() const { return arrivals_; }

  int num_queues() const { return static_cast<int>(queue_node_.size()); }
  NodeId queue_node(int q) const { return queue_node_[q]; }
  CommodityId queue_commodity(int q) const { return queue_commodity_[q]; }
  // Queue index of (n, c), or -1 for destination pairs.
  int queue_of(NodeId n, CommodityId c) const;

  std::size_t num_states() const { return num_states_; }
  std::vector<int> decode(std::size_t state) const;
  std::size_t encode(const std::vector<int>& queues) const;
  double cost(std::size_t state) const;  // sum of queue lengths

  // Joint arrival outcomes (per queue amounts) with probabilities.
  struct ArrivalOutcome {
    std::vector<int> amount;
    double probability;
  };
  const std::vector<ArrivalOutcome>& arrival_outcomes() const { return outcomes_; }

  // Admissible (I, nu) choices in topology state s at queue state u, in
  // lexicographic order of (I, nu) with nu as an L x C row-major vector.
  struct Action {
    int resource = 0;
    std::vector<int> nu;
  };
  std::vector<Action> actions(int topology_state, std::size_t state) const;

  // Next state after transfers nu and arrivals; overflow beyond the cap is
  // dropped and its amount returned through `dropped` when non-null.
  std::size_t next_state(std::size_t state, const std::vector<int>& nu, const std::vector<int>& arrivals,
                         int* dropped = nullptr) const;

 private:
  std::shared_ptr<const NetworkGraph> graph_;
  std::shared_ptr<const RateModel> rates_;
  int cap_;
  std::vector<ArrivalPmf> arrivals_;
  std::vector<NodeId> queue_node_;
  std::vector<CommodityId> queue_commodity_;
  std::vector<int> queue_index_;  // n * C + c -> queue or -1
  std::size_t num_states_ = 1;
  std::vector<ArrivalOutcome> outcomes_;
};

struct ValueIterationResult {
  double d = 0.0;            // optimal average cost
  std::vector<double> V;     // relative values, V(0) = 0
  double residual = 0.0;     // span of TV - V at exit
  int iterations = 0;
  bool converged = false;
};

// Relative value iteration with aperiodicity damping tau in (0, 1].
ValueIterationResult relative_value_iteration(const MdpSpec& spec, double tol = 1e-9, int max_iters = 200000,
                                              double tau = 0.5);

// Decision per (topology state, queue state).
struct PolicyTable {
  int topology_states = 1;
  std::vector<MdpSpec::Action> decisions;  // index s * num_states + u
  const MdpSpec::Action& at(int s, std::size_t u, std::size_t num_states) const {
    return decisions[static_cast<std::size_t>(s) * num_states + u];
  }
};

// Greedy one-step policy on V; ties go to the first action.
PolicyTable optimal_policy(const MdpSpec& spec, const std::vector<double>& V);
// Backpressure on finite-difference derivatives of V, capped by backlog.
PolicyTable asymptotic_policy(const MdpSpec& spec, const std::vector<double>& V);
// Traditional backpressure (zero bias), capped by backlog.
PolicyTable bp_policy(const MdpSpec& spec);

struct RecurrentClass {
  std::vector<std::size_t> states;
  double average_cost = 0.0;
  double absorption_from_empty = 0.0;  // probability the chain started empty ends here
};

struct PolicyEvaluation {
  double average_cost = 0.0;  // from the empty state
  bool unichain = true;
  std::vector<RecurrentClass> classes;
  double drop_rate = 0.0;     // expected dropped units per slot, from the empty state
  std::vector<double> stationary;  // mixture seen from the empty state
};

// Exact stationary evaluation of a fixed policy.
PolicyEvaluation evaluate_policy(const MdpSpec& spec, const PolicyTable& policy);

// CSV exports.
std::string value_table_csv(const MdpSpec& spec, const ValueIterationResult& result);
std::string policy_table_csv(const MdpSpec& spec, const PolicyTable& policy);

// Instances.
MdpSpec single_queue_mdp(double p, int cap);              // one link, Bernoulli(p) unit arrivals
MdpSpec tandem_mdp(int links, double p, int cap);         // line of unit links, Bernoulli(p) at the head
// Diamond s->a, s->b, a->d, b->d with unit links; source pmf at s and
// Bernoulli cross traffic at a that congests the upper branch.
MdpSpec diamond_mdp(std::vector<double> source_pmf, double cross_traffic, int cap);

}  // namespace bpsim
