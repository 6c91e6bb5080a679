#include "bpsim/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bpsim {

RateModel::RateModel(const NetworkGraph& graph, std::vector<double> state_probabilities,
                     int num_actions, std::vector<double> rates)
    : probabilities_(std::move(state_probabilities)),
      num_actions_(num_actions),
      num_links_(graph.num_links()),
      rates_(std::move(rates)) {
  if (probabilities_.empty()) throw ConfigError("rate model: empty topology state set");
  if (num_actions_ <= 0) throw ConfigError("rate model: empty resource action set");
  double total = std::accumulate(probabilities_.begin(), probabilities_.end(), 0.0);
  for (double p : probabilities_) {
    if (p < 0.0) throw ConfigError("rate model: negative state probability");
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("rate model: state probabilities must sum to 1");
  const std::size_t expected =
      probabilities_.size() * static_cast<std::size_t>(num_actions_) * num_links_;
  if (rates_.size() != expected) throw ConfigError("rate model: rate table has the wrong size");
  for (double r : rates_) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("rate model: rates must be finite and >= 0");
    max_rate_ = std::max(max_rate_, r);
  }
}

double RateModel::rate(const NetworkGraph& graph, int state, int action, NodeId a, NodeId b) const {
  auto l = graph.find_link(a, b);
  return l ? rate(state, action, *l) : 0.0;
}

int RateModel::sample_state(double u) const {
  double acc = 0.0;
  for (int s = 0; s < num_states(); ++s) {
    acc += probabilities_[s];
    if (u < acc) return s;
  }
  return num_states() - 1;
}

double RateModel::max_out_rate(const NetworkGraph& graph, NodeId n) const {
  double best = 0.0;
  for (int s = 0; s < num_states(); ++s) {
    for (int i = 0; i < num_actions_; ++i) {
      double total = 0.0;
      for (LinkId l : graph.out_links(n)) total += rate(s, i, l);
      best = std::max(best, total);
    }
  }
  return best;
}

double RateModel::max_in_rate(const NetworkGraph& graph, NodeId n) const {
  double best = 0.0;
  for (int s = 0; s < num_states(); ++s) {
    for (int i = 0; i < num_actions_; ++i) {
      double total = 0.0;
      for (LinkId l : graph.in_links(n)) total += rate(s, i, l);
      best = std::max(best, total);
    }
  }
  return best;
}

RateModel wireline_rate_model(const NetworkGraph& graph, double rate_per_link) {
  if (!(rate_per_link > 0.0)) throw ConfigError("wireline rate model: rate must be positive");
  return RateModel(graph, {1.0}, 1, std::vector<double>(graph.num_links(), rate_per_link));
}

}  // namespace bpsim
