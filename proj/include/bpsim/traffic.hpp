#pragma once

#include <cstdint>
#include <vector>

#include "bpsim/graph.hpp"
#include "bpsim/matrix.hpp"

namespace bpsim {

struct ArrivalDistribution {
  enum class Kind { poisson, bernoulli, constant, uniform };
  Kind kind = Kind::constant;
  // poisson: a = mean. bernoulli: a = probability, b = batch size.
  // constant: a = amount. uniform: [a, b].
  double a = 0.0;
  double b = 0.0;

  static ArrivalDistribution poisson(double mean) { return {Kind::poisson, mean, 0.0}; }
  static ArrivalDistribution bernoulli(double p, double batch) { return {Kind::bernoulli, p, batch}; }
  static ArrivalDistribution constant(double amount) { return {Kind::constant, amount, 0.0}; }
  static ArrivalDistribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }

  double mean() const;
  // Upper bound of the support; +inf for Poisson.
  double max() const;
};

struct ArrivalEntry {
  NodeId node = 0;
  CommodityId commodity = 0;
  ArrivalDistribution distribution;
};

// Exogenous arrival processes, i.i.d. across slots and independent across
// (node, commodity) pairs.
class ArrivalSpec {
 public:
  ArrivalSpec() = default;
  ArrivalSpec(const NetworkGraph& graph, std::vector<ArrivalEntry> entries);

  const std::vector<ArrivalEntry>& entries() const { return entries_; }
  int num_nodes() const { return nodes_; }
  int num_commodities() const { return commodities_; }

 private:
  int nodes_ = 0;
  int commodities_ = 0;
  std::vector<ArrivalEntry> entries_;
};

// Arrivals for one slot. The sample of each entry depends only on
// (seed, node, commodity, slot).
Matrix sample_arrivals(const ArrivalSpec& spec, std::uint64_t seed, std::int64_t slot);
void sample_arrivals_into(const ArrivalSpec& spec, std::uint64_t seed, std::int64_t slot, Matrix& out);

Matrix mean_rates(const ArrivalSpec& spec);
// Per-(node, commodity) support maxima A_max (+inf for Poisson entries).
Matrix arrival_caps(const ArrivalSpec& spec);

}  // namespace bpsim
