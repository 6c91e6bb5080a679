#pragma once

#include <cstdint>
#include <vector>

#include "bpsim/graph.hpp"

namespace bpsim {

// Finite topology-state / resource-action rate table.
// rate(s, I, l) is stored densely as [state][action][link].
class RateModel {
 public:
  RateModel(const NetworkGraph& graph, std::vector<double> state_probabilities, int num_actions,
            std::vector<double> rates);

  int num_states() const { return static_cast<int>(probabilities_.size()); }
  int num_actions() const { return num_actions_; }
  int num_links() const { return num_links_; }
  double state_probability(int s) const { return probabilities_[s]; }
  double max_rate() const { return max_rate_; }

  double rate(int state, int action, LinkId l) const {
    return rates_[(static_cast<std::size_t>(state) * num_actions_ + action) * num_links_ + l];
  }
  // Rate over the node pair (a, b); zero when (a, b) is not a link.
  double rate(const NetworkGraph& graph, int state, int action, NodeId a, NodeId b) const;

  std::span<const double> rates(int state, int action) const {
    return {rates_.data() + (static_cast<std::size_t>(state) * num_actions_ + action) * num_links_,
            static_cast<std::size_t>(num_links_)};
  }

  // Draws a topology state from a uniform variate in [0, 1).
  int sample_state(double u) const;

  // Largest total outgoing / incoming rate of node n over all (state, action).
  double max_out_rate(const NetworkGraph& graph, NodeId n) const;
  double max_in_rate(const NetworkGraph& graph, NodeId n) const;

 private:
  std::vector<double> probabilities_;
  int num_actions_ = 0;
  int num_links_ = 0;
  std::vector<double> rates_;
  double max_rate_ = 0.0;
};

// Single topology state, single action (every link active), fixed rate.
RateModel wireline_rate_model(const NetworkGraph& graph, double rate_per_link);

}  // namespace bpsim
