#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bpsim/engine.hpp"

namespace bpsim {

enum class SweepParameter { lambda, z, B, M };

std::string parameter_name(SweepParameter p);
SweepParameter parse_parameter(const std::string& name);

// Everything one run needs. Graph and rate model are shared read-only.
struct Experiment {
  std::shared_ptr<const NetworkGraph> graph;
  std::shared_ptr<const RateModel> rates;
  ArrivalSpec arrivals;
  PolicySpec policy;
  RunConfig config;
};

// Copy of base with the parameter set to value. lambda rescales every
// arrival entry to mean value; z and B rebuild the named policy; M sets the
// flow-control weight.
Experiment with_parameter(const Experiment& base, SweepParameter p, double value);

struct SweepRow {
  double value = 0.0;
  int replication = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

// Seed of one grid cell: hash(base seed, value, replication).
std::uint64_t sweep_seed(std::uint64_t base, double value, int replication);

// Runs the (value, replication) grid on up to `jobs` threads. Rows come back
// ordered by value, then replication, independent of the thread count.
std::vector<SweepRow> sweep(const Experiment& base, SweepParameter p, const std::vector<double>& values,
                            int replications, int jobs = 1);

// Calls task(i) for i in [0, count) on up to `jobs` threads. The first
// exception is rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

}  // namespace bpsim
