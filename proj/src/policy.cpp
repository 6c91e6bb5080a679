#include "bpsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bpsim/margin.hpp"

namespace bpsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

const UtilitySpec kDefaultUtility = UtilitySpec::log();

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::bp: return "bp";
    case Algorithm::bpbias: return "bpbias";
    case Algorithm::bpnxt: return "bpnxt";
    case Algorithm::bpmin: return "bpmin";
    case Algorithm::bpnxtbias: return "bpnxtbias";
    case Algorithm::bpminbias: return "bpminbias";
    case Algorithm::custom: return "custom";
  }
  return "bp";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::bp, Algorithm::bpbias, Algorithm::bpnxt, Algorithm::bpmin,
                      Algorithm::bpnxtbias, Algorithm::bpminbias, Algorithm::custom}) {
    if (algorithm_name(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

const UtilitySpec& FlowControlSpec::utility(NodeId n, CommodityId c) const {
  if (utilities.empty()) return kDefaultUtility;
  return utilities[static_cast<std::size_t>(n) * r_max.cols() + c];
}

void FlowControlSpec::validate(int nodes, int commodities) const {
  if (!(M > 0.0) || !std::isfinite(M)) throw ConfigError("flow_control.M must be positive");
  if (r_max.rows() != static_cast<std::size_t>(nodes) || r_max.cols() != static_cast<std::size_t>(commodities)) {
    throw ConfigError("flow_control.r_max has the wrong shape");
  }
  for (double v : r_max.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("flow_control.r_max must be finite and >= 0");
  }
  if (!utilities.empty() && utilities.size() != static_cast<std::size_t>(nodes) * commodities) {
    throw ConfigError("flow_control.utility has the wrong size");
  }
  for (const auto& u : utilities) {
    if (u.weight < 0.0) throw ConfigError("flow_control.utility weight must be >= 0");
  }
}

PolicySpec PolicySpec::make(Algorithm algorithm, double z, double per_link_cost) {
  PolicySpec p;
  p.algorithm = algorithm;
  p.z = z;
  p.per_link_cost = per_link_cost;
  switch (algorithm) {
    case Algorithm::bp: p.bias = BiasSpec::zero(); break;
    case Algorithm::bpbias: p.bias = BiasSpec::shortest_path(per_link_cost); break;
    case Algorithm::bpnxt: p.bias = BiasSpec::next_hop(z); break;
    case Algorithm::bpmin: p.bias = BiasSpec::min_downstream(z); break;
    case Algorithm::bpnxtbias:
      p.bias = BiasSpec::composite({BiasSpec::next_hop(z), BiasSpec::shortest_path(per_link_cost)});
      break;
    case Algorithm::bpminbias:
      p.bias = BiasSpec::composite({BiasSpec::min_downstream(z), BiasSpec::shortest_path(per_link_cost)});
      break;
    case Algorithm::custom: throw ConfigError("custom policies need an explicit bias");
  }
  p.bias.validate();
  return p;
}

std::string PolicySpec::label() const {
  switch (algorithm) {
    case Algorithm::bp: return "BP";
    case Algorithm::bpbias: return "BPbias(B=" + fmt(per_link_cost) + ")";
    case Algorithm::bpnxt: return "BPnxt(z=" + fmt(z) + ")";
    case Algorithm::bpmin: return "BPmin(z=" + fmt(z) + ")";
    case Algorithm::bpnxtbias: return "BPnxtbias(z=" + fmt(z) + ",B=" + fmt(per_link_cost) + ")";
    case Algorithm::bpminbias: return "BPminbias(z=" + fmt(z) + ",B=" + fmt(per_link_cost) + ")";
    case Algorithm::custom: return "custom";
  }
  return "BP";
}

void compute_backpressure_into(const NetworkGraph& graph, const Matrix& backlog, const Matrix& bias,
                               const Matrix* static_bias, BackpressureTable& out) {
  const int nodes = graph.num_nodes();
  const int commodities = graph.num_commodities();
  const int links = graph.num_links();
  auto shape_ok = [&](const Matrix& m) {
    return m.rows() == static_cast<std::size_t>(nodes) && m.cols() == static_cast<std::size_t>(commodities);
  };
  if (!shape_ok(backlog) || !shape_ok(bias) || (static_bias && !shape_ok(*static_bias))) {
    throw std::invalid_argument("compute_backpressure: matrix has the wrong shape");
  }
  if (out.W.rows() != static_cast<std::size_t>(links) || out.W.cols() != static_cast<std::size_t>(commodities)) {
    out.W = Matrix(links, commodities);
  }
  out.c_star.assign(links, -1);
  out.W_star.assign(links, 0.0);

  // Potential U + f + sp per (n, c); +inf marks an infinite bias term.
  thread_local std::vector<double> potential;
  potential.resize(static_cast<std::size_t>(nodes) * commodities);
  {
    auto u = backlog.values();
    auto f = bias.values();
    for (std::size_t i = 0; i < potential.size(); ++i) {
      const double b = f[i] + (static_bias ? static_bias->values()[i] : 0.0);
      potential[i] = std::isinf(b) ? kPosInf : u[i] + b;
    }
  }

  for (LinkId l = 0; l < links; ++l) {
    const Link& k = graph.link(l);
    const double* pa = &potential[static_cast<std::size_t>(k.from) * commodities];
    const double* pb = &potential[static_cast<std::size_t>(k.to) * commodities];
    auto w_row = out.W.row(l);
    const std::uint8_t* allowed = graph.allowed_row(l);
    for (CommodityId c = 0; c < commodities; ++c) {
      const double w = pa[c] - pb[c];
      // An infinite term on either side gives +inf or NaN here; both map to -inf.
      w_row[c] = (allowed[c] && w < kPosInf) ? w : kNegInf;
    }
    double best = kNegInf;
    int best_c = -1;
    for (CommodityId c = 0; c < commodities; ++c) {
      if (allowed[c] && (best_c < 0 || w_row[c] > best)) {
        best = w_row[c];
        best_c = c;
      }
    }
    out.c_star[l] = best_c;
    out.W_star[l] = best_c >= 0 && best > 0.0 ? best : 0.0;
  }
}

BackpressureTable compute_backpressure(const NetworkGraph& graph, const Matrix& backlog, const Matrix& bias,
                                       const Matrix* static_bias) {
  BackpressureTable t;
  compute_backpressure_into(graph, backlog, bias, static_bias, t);
  return t;
}

int allocate_resources(const RateModel& rates, int state, const BackpressureTable& table) {
  if (rates.num_actions() <= 0) throw ConfigError("resource allocation: empty action set");
  if (rates.num_actions() == 1) return 0;
  int best_action = 0;
  double best = kNegInf;
  for (int a = 0; a < rates.num_actions(); ++a) {
    auto r = rates.rates(state, a);
    double v = 0.0;
    for (std::size_t l = 0; l < r.size(); ++l) v += table.W_star[l] * r[l];
    if (v > best) {
      best = v;
      best_action = a;
    }
  }
  return best_action;
}

void route_into(const BackpressureTable& table, std::span<const double> link_rates, Matrix& mu) {
  if (mu.rows() != table.W.rows() || mu.cols() != table.W.cols()) {
    mu = Matrix(table.W.rows(), table.W.cols());
  } else {
    mu.fill(0.0);
  }
  if (link_rates.size() != table.W_star.size()) throw std::invalid_argument("route: rate vector has the wrong size");
  for (std::size_t l = 0; l < table.W_star.size(); ++l) {
    if (table.W_star[l] > 0.0) mu(l, table.c_star[l]) = link_rates[l];
  }
}

Matrix route(const BackpressureTable& table, std::span<const double> link_rates, int commodities) {
  Matrix mu(table.W_star.size(), commodities);
  route_into(table, link_rates, mu);
  return mu;
}

double auxiliary_rate(const UtilitySpec& h, double M, double Y, double r_max, double slot) {
  if (r_max <= 0.0) return 0.0;
  switch (h.kind) {
    case UtilitySpec::Kind::none: return 0.0;
    case UtilitySpec::Kind::log: {
      if (Y <= 0.0 || h.weight <= 0.0) return h.weight > 0.0 ? r_max : 0.0;
      return std::min(M * h.weight / (Y * slot), r_max);
    }
    case UtilitySpec::Kind::linear: return M * h.weight >= Y * slot ? r_max : 0.0;
  }
  return 0.0;
}

void flow_control_admit_into(const Matrix& transport, const Matrix& backlog, const Matrix& virtual_queue,
                             const FlowControlSpec& spec, double slot, Matrix& admitted, Matrix& auxiliary) {
  const std::size_t rows = backlog.rows();
  const std::size_t cols = backlog.cols();
  if (transport.rows() != rows || transport.cols() != cols || virtual_queue.rows() != rows ||
      virtual_queue.cols() != cols || spec.r_max.rows() != rows || spec.r_max.cols() != cols) {
    throw std::invalid_argument("flow_control_admit: matrix has the wrong shape");
  }
  if (admitted.rows() != rows || admitted.cols() != cols) admitted = Matrix(rows, cols);
  if (auxiliary.rows() != rows || auxiliary.cols() != cols) auxiliary = Matrix(rows, cols);
  for (std::size_t n = 0; n < rows; ++n) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double cap = spec.r_max(n, c);
      admitted(n, c) = virtual_queue(n, c) > backlog(n, c) ? std::min(transport(n, c) / slot, cap) : 0.0;
      auxiliary(n, c) = auxiliary_rate(spec.utility(static_cast<NodeId>(n), static_cast<CommodityId>(c)), spec.M,
                                       virtual_queue(n, c), cap, slot);
    }
  }
}

std::pair<Matrix, Matrix> flow_control_admit(const Matrix& transport, const Matrix& backlog,
                                             const Matrix& virtual_queue, const FlowControlSpec& spec,
                                             double slot) {
  Matrix r, g;
  flow_control_admit_into(transport, backlog, virtual_queue, spec, slot, r, g);
  return {std::move(r), std::move(g)};
}

BacklogBound backlog_bound(const NetworkGraph& graph, const RateModel& rates, const Matrix& arrival_caps,
                             const Matrix& eps, const Matrix& delta, double z) {
  const int nodes = graph.num_nodes();
  const int commodities = graph.num_commodities();
  for (const Matrix* m : {&arrival_caps, &eps, &delta}) {
    if (m->rows() != static_cast<std::size_t>(nodes) || m->cols() != static_cast<std::size_t>(commodities)) {
      throw std::invalid_argument("backlog_bound: matrix has the wrong shape");
    }
  }
  const Matrix ez = eps_z(graph, rates.max_rate(), z);

  BacklogBound out;
  double beta = std::numeric_limits<double>::infinity();
  for (NodeId n = 0; n < nodes; ++n) {
    bool holds_traffic = false;
    double a_max = 0.0;
    for (CommodityId c = 0; c < commodities; ++c) {
      if (graph.destination(c) == n) continue;
      holds_traffic = true;
      if (!std::isfinite(arrival_caps(n, c))) {
        throw std::invalid_argument("backlog_bound: arrivals must be bounded");
      }
      if (eps(n, c) < ez(n, c)) {
        throw std::invalid_argument("backlog_bound: margin below eps_z at node " + std::to_string(n) +
                                    ", commodity " + std::to_string(c));
      }
      a_max += arrival_caps(n, c);
      beta = std::min(beta, eps(n, c) + delta(n, c) - ez(n, c));
    }
    if (!holds_traffic) continue;
    const double mu_out = rates.max_out_rate(graph, n);
    const double mu_in = rates.max_in_rate(graph, n);
    out.N_Bbar += 0.5 * (mu_out * mu_out + (a_max + mu_in) * (a_max + mu_in));
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("backlog_bound: infeasible margin (beta_z <= 0)");
  }
  out.beta = beta;
  out.bound = out.N_Bbar / beta;
  return out;
}

}  // namespace bpsim
