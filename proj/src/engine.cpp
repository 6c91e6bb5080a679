#include "bpsim/engine.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bpsim/bias.hpp"
#include "bpsim/rng.hpp"

namespace bpsim {

namespace {

constexpr std::uint64_t kTopologyStream = 0x746f706f;

std::string state_summary(const QueueState& s) {
  std::ostringstream os;
  int shown = 0;
  for (std::size_t n = 0; n < s.network.rows(); ++n) {
    for (std::size_t c = 0; c < s.network.cols(); ++c) {
      if (s.network(n, c) == 0.0 && s.transport(n, c) == 0.0 && s.virtual_queue(n, c) == 0.0) continue;
      if (shown++ == 32) {
        os << " ...";
        return os.str();
      }
      os << " (" << n << "," << c << "): U=" << s.network(n, c) << " Q=" << s.transport(n, c)
         << " Y=" << s.virtual_queue(n, c);
    }
  }
  return os.str();
}

void dump_state(std::ofstream& out, long slot, const QueueState& s) {
  for (std::size_t n = 0; n < s.network.rows(); ++n) {
    for (std::size_t c = 0; c < s.network.cols(); ++c) {
      out << slot << ',' << n << ',' << c << ',' << s.network(n, c) << ',' << s.transport(n, c) << ','
          << s.virtual_queue(n, c) << '\n';
    }
  }
}

}  // namespace

double RunMetrics::conservation_error() const {
  long double in = 0.0L;
  for (double v : injected.values()) in += v;
  long double out = 0.0L;
  for (double v : delivered) out += v;
  return static_cast<double>(in - out - (static_cast<long double>(final_total_backlog) - initial_total_backlog));
}

RunMetrics run(const NetworkGraph& graph, const RateModel& rates, const ArrivalSpec& arrivals,
               const PolicySpec& policy, const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const int N = graph.num_nodes();
  const int C = graph.num_commodities();
  const int L = graph.num_links();
  const long warmup = config.effective_warmup();
  if (config.slots <= 0 || warmup < 0 || warmup >= config.slots) {
    throw ConfigError("engine: need slots > warmup >= 0");
  }
  if (rates.num_links() != L) throw ConfigError("engine: rate model does not match the graph");
  if (arrivals.num_nodes() != N || arrivals.num_commodities() != C) {
    throw ConfigError("engine: arrival spec does not match the graph");
  }
  const bool fc = policy.flow_control.has_value();
  if (fc) policy.flow_control->validate(N, C);

  QueueState state(N, C, config.slot_duration);
  if (config.initial_backlog) {
    const Matrix& u0 = *config.initial_backlog;
    if (u0.rows() != static_cast<std::size_t>(N) || u0.cols() != static_cast<std::size_t>(C)) {
      throw ConfigError("engine: initial backlog has the wrong shape");
    }
    state.network = u0;
    for (CommodityId c = 0; c < C; ++c) state.network(graph.destination(c), c) = 0.0;
    for (double v : state.network.values()) {
      if (!(v >= 0.0)) throw ConfigError("engine: initial backlog must be >= 0");
    }
  }
  if (config.transport_cap) {
    if (config.transport_cap->rows() != static_cast<std::size_t>(N) ||
        config.transport_cap->cols() != static_cast<std::size_t>(C)) {
      throw ConfigError("engine: transport cap has the wrong shape");
    }
    state.transport_cap = *config.transport_cap;
  }
  for (CommodityId c = 0; c < C; ++c) state.transport_cap(graph.destination(c), c) = 0.0;

  BiasEvaluator bias(graph, policy.bias);
  const Matrix* static_bias = bias.has_static() ? &bias.static_bias() : nullptr;

  RunMetrics m;
  m.slots = config.slots;
  m.warmup = warmup;
  m.seed = config.seed;
  m.flow_control = fc;
  m.delivered.assign(C, 0.0);
  m.injected = Matrix(N, C);
  m.initial_total_backlog = state.network.sum();

  std::ofstream dump;
  if (!config.state_dump_path.empty()) {
    dump.open(config.state_dump_path);
    if (!dump) throw ConfigError("engine: cannot open state dump " + config.state_dump_path);
    dump << "slot,node,commodity,U,Q,Y\n";
  }

  BackpressureTable table;
  Matrix mu(L, C), nu(L, C), arrivals_now(N, C), admitted(N, C), auxiliary(N, C);
  std::vector<long double> backlog_sum(C, 0.0L);
  std::vector<long double> delivered_window(C, 0.0L);
  std::vector<long double> r_sum(static_cast<std::size_t>(N) * C, 0.0L);
  std::vector<long double> g_sum(static_cast<std::size_t>(N) * C, 0.0L);
  std::vector<long double> injected(static_cast<std::size_t>(N) * C, 0.0L);
  std::vector<long double> delivered_total(C, 0.0L);
  long double total_sum = 0.0L;
  long double trailing_sum = 0.0L;
  long double transport_sum = 0.0L;
  long double dropped = 0.0L;
  const long trailing_start = config.slots - std::max(1L, config.slots / 10);
  const double dt = config.slot_duration;

  for (long t = 0; t < config.slots; ++t) {
    try {
      int s = 0;
      if (rates.num_states() > 1) {
        SplitMix64 rng(hash_key({config.seed, kTopologyStream, static_cast<std::uint64_t>(t)}));
        s = rates.sample_state(rng.uniform());
      }
      const Matrix& f = bias.dynamic_bias(state.network);
      compute_backpressure_into(graph, state.network, f, static_bias, table);
      const int action = allocate_resources(rates, s, table);
      route_into(table, rates.rates(s, action), mu);
      if (fc) {
        flow_control_admit_into(state.transport, state.network, state.virtual_queue, *policy.flow_control, dt,
                                admitted, auxiliary);
      }
      resolve_transfers_into(graph, state.network, mu, dt, nu);
      sample_arrivals_into(arrivals, config.seed, t, arrivals_now);
      for (double a : arrivals_now.values()) m.max_arrival = std::max(m.max_arrival, a);

      const Matrix& inflow = fc ? admitted : arrivals_now;
      std::vector<double> delivered = step_network_queues(graph, state, nu, inflow);
      if (fc) {
        Matrix drop = step_transport_queues(state, admitted, arrivals_now);
        for (double v : drop.values()) dropped += v;
        step_virtual_queues(state, admitted, auxiliary);
      }

      for (std::size_t i = 0; i < injected.size(); ++i) injected[i] += inflow.values()[i] * dt;
      for (CommodityId c = 0; c < C; ++c) delivered_total[c] += delivered[c];

      double total = 0.0;
      for (double v : state.network.values()) total += v;
      m.max_backlog = std::max(m.max_backlog, total);
      if (t >= trailing_start) trailing_sum += total;
      if (t >= warmup) {
        total_sum += total;
        for (NodeId n = 0; n < N; ++n) {
          for (CommodityId c = 0; c < C; ++c) backlog_sum[c] += state.network(n, c);
        }
        for (CommodityId c = 0; c < C; ++c) delivered_window[c] += delivered[c];
        if (fc) {
          for (std::size_t i = 0; i < r_sum.size(); ++i) {
            r_sum[i] += admitted.values()[i];
            g_sum[i] += auxiliary.values()[i];
          }
          for (double v : state.transport.values()) transport_sum += v;
        }
      }
      if (config.series_stride > 0 && t % config.series_stride == 0) m.backlog_series.push_back(total);
      if (dump.is_open() && t % std::max(1L, config.state_dump_stride) == 0) dump_state(dump, t, state);
    } catch (const InvariantViolation& e) {
      if (dump.is_open()) dump_state(dump, t, state);
      throw InvariantViolation("slot " + std::to_string(t) + ": " + e.what() + "; state:" + state_summary(state));
    }
  }

  const long double window = static_cast<long double>(config.slots - warmup);
  m.avg_total_backlog = static_cast<double>(total_sum / window);
  m.trailing_avg_backlog = static_cast<double>(trailing_sum / static_cast<long double>(config.slots - trailing_start));
  m.per_commodity_backlog.resize(C);
  m.delivered_rate.resize(C);
  for (CommodityId c = 0; c < C; ++c) {
    m.per_commodity_backlog[c] = static_cast<double>(backlog_sum[c] / window);
    m.delivered_rate[c] = static_cast<double>(delivered_window[c] / window);
    m.delivered[c] = static_cast<double>(delivered_total[c]);
  }
  for (std::size_t i = 0; i < injected.size(); ++i) m.injected.values()[i] = static_cast<double>(injected[i]);
  m.final_total_backlog = state.network.sum();
  m.unreachable_reports = bias.unreachable_reports();
  m.dropped_total = static_cast<double>(dropped);

  if (fc) {
    const FlowControlSpec& spec = *policy.flow_control;
    m.avg_admitted_rate = Matrix(N, C);
    m.avg_auxiliary = Matrix(N, C);
    for (std::size_t i = 0; i < r_sum.size(); ++i) {
      m.avg_admitted_rate.values()[i] = static_cast<double>(r_sum[i] / window);
      m.avg_auxiliary.values()[i] = static_cast<double>(g_sum[i] / window);
    }
    m.avg_transport_backlog = static_cast<double>(transport_sum / window);
    for (NodeId n = 0; n < N; ++n) {
      for (CommodityId c = 0; c < C; ++c) {
        if (spec.r_max(n, c) <= 0.0) continue;
        const UtilitySpec& h = spec.utility(n, c);
        if (h.kind == UtilitySpec::Kind::none) continue;
        m.utility_at_rbar += h.value(m.avg_admitted_rate(n, c));
        m.utility_at_gammabar += h.value(m.avg_auxiliary(n, c));
      }
    }
  }
  m.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return m;
}

LittlesLawDelay littles_law_delay(const RunMetrics& metrics) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  LittlesLawDelay d;
  const std::size_t C = metrics.per_commodity_backlog.size();
  d.per_commodity.assign(C, nan);
  d.defined.assign(C, false);
  double backlog = 0.0;
  double rate = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    backlog += metrics.per_commodity_backlog[c];
    rate += metrics.delivered_rate[c];
    if (metrics.delivered_rate[c] > 0.0) {
      d.per_commodity[c] = metrics.per_commodity_backlog[c] / metrics.delivered_rate[c];
      d.defined[c] = true;
    } else if (metrics.per_commodity_backlog[c] == 0.0) {
      d.per_commodity[c] = 0.0;
      d.defined[c] = true;
    }
  }
  d.aggregate = rate > 0.0 ? backlog / rate : (backlog == 0.0 ? 0.0 : nan);
  return d;
}

}  // namespace bpsim
