#include "bpsim/sweep.hpp"

#include <atomic>
#include <bit>
#include <exception>
#include <mutex>
#include <thread>

#include "bpsim/rng.hpp"

namespace bpsim {

std::string parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::lambda: return "lambda";
    case SweepParameter::z: return "z";
    case SweepParameter::B: return "B";
    case SweepParameter::M: return "M";
  }
  return "lambda";
}

SweepParameter parse_parameter(const std::string& name) {
  for (SweepParameter p : {SweepParameter::lambda, SweepParameter::z, SweepParameter::B, SweepParameter::M}) {
    if (parameter_name(p) == name) return p;
  }
  throw ConfigError("unknown sweep parameter '" + name + "' (expected lambda, z, B or M)");
}

Experiment with_parameter(const Experiment& base, SweepParameter p, double value) {
  Experiment e = base;
  switch (p) {
    case SweepParameter::lambda: {
      if (!(value >= 0.0)) throw ConfigError("sweep: lambda must be >= 0");
      std::vector<ArrivalEntry> entries = base.arrivals.entries();
      for (ArrivalEntry& entry : entries) {
        auto& d = entry.distribution;
        switch (d.kind) {
          case ArrivalDistribution::Kind::poisson:
          case ArrivalDistribution::Kind::constant: d.a = value; break;
          case ArrivalDistribution::Kind::bernoulli:
            if (value > d.b) throw ConfigError("sweep: lambda exceeds the Bernoulli batch size");
            d.a = d.b > 0.0 ? value / d.b : 0.0;
            break;
          case ArrivalDistribution::Kind::uniform: {
            const double half = 0.5 * (d.b - d.a);
            d.a = std::max(0.0, value - half);
            d.b = d.a + 2.0 * (value - d.a);
            break;
          }
        }
      }
      e.arrivals = ArrivalSpec(*base.graph, std::move(entries));
      break;
    }
    case SweepParameter::z:
    case SweepParameter::B: {
      const double z = p == SweepParameter::z ? value : base.policy.z;
      const double b = p == SweepParameter::B ? value : base.policy.per_link_cost;
      PolicySpec rebuilt = PolicySpec::make(base.policy.algorithm, z, b);
      rebuilt.flow_control = std::move(e.policy.flow_control);
      e.policy = std::move(rebuilt);
      break;
    }
    case SweepParameter::M:
      if (!e.policy.flow_control) throw ConfigError("sweep: M needs flow control");
      e.policy.flow_control->M = value;
      break;
  }
  return e;
}

std::uint64_t sweep_seed(std::uint64_t base, double value, int replication) {
  return hash_key({base, std::bit_cast<std::uint64_t>(value), static_cast<std::uint64_t>(replication)});
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        {
          std::lock_guard lock(error_mutex);
          if (error) return;
        }
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SweepRow> sweep(const Experiment& base, SweepParameter p, const std::vector<double>& values,
                            int replications, int jobs) {
  if (replications < 1) throw ConfigError("sweep: replications must be >= 1");
  std::vector<SweepRow> rows(values.size() * static_cast<std::size_t>(replications));
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = values[i / replications];
    row.replication = static_cast<int>(i % replications);
    row.seed = sweep_seed(base.config.seed, row.value, row.replication);
    Experiment e = with_parameter(base, p, row.value);
    e.config.seed = row.seed;
    row.metrics = run(*e.graph, *e.rates, e.arrivals, e.policy, e.config);
  });
  return rows;
}

}  // namespace bpsim
