#include "bpsim/margin.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace bpsim {

namespace {

void check_nc(const NetworkGraph& graph, const Matrix& m, const char* what) {
  if (m.rows() != static_cast<std::size_t>(graph.num_nodes()) ||
      m.cols() != static_cast<std::size_t>(graph.num_commodities())) {
    throw std::invalid_argument(std::string(what) + ": matrix has the wrong shape");
  }
}

void check_capacities(const NetworkGraph& graph, const std::vector<double>& capacities) {
  if (capacities.size() != static_cast<std::size_t>(graph.num_links())) {
    throw std::invalid_argument("capacity vector has the wrong size");
  }
  for (double c : capacities) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("capacities must be finite and >= 0");
  }
}

// Flow variables f_{l,c} on L^(c), excluding links that leave dest(c).
struct FlowModel {
  std::vector<int> var;  // l * C + c -> lp variable or -1
  std::vector<int> conservation_row;  // n * C + c -> row or -1
};

FlowModel add_flow_variables(LinearProgram& lp, const NetworkGraph& graph) {
  const int C = graph.num_commodities();
  FlowModel fm;
  fm.var.assign(static_cast<std::size_t>(graph.num_links()) * C, -1);
  for (LinkId l = 0; l < graph.num_links(); ++l) {
    for (CommodityId c = 0; c < C; ++c) {
      if (!graph.allowed(c, l) || graph.link(l).from == graph.destination(c)) continue;
      fm.var[static_cast<std::size_t>(l) * C + c] =
          lp.add_var(0.0, "f_" + std::to_string(l) + "_" + std::to_string(c));
    }
  }
  return fm;
}

// Row terms of outflow - inflow at (n, c).
std::vector<std::pair<int, double>> net_outflow(const NetworkGraph& graph, const FlowModel& fm, NodeId n,
                                                CommodityId c) {
  const int C = graph.num_commodities();
  std::vector<std::pair<int, double>> terms;
  for (LinkId l : graph.out_links(n)) {
    int v = fm.var[static_cast<std::size_t>(l) * C + c];
    if (v >= 0) terms.push_back({v, 1.0});
  }
  for (LinkId l : graph.in_links(n)) {
    int v = fm.var[static_cast<std::size_t>(l) * C + c];
    if (v >= 0) terms.push_back({v, -1.0});
  }
  return terms;
}

void add_capacity_rows(LinearProgram& lp, const NetworkGraph& graph, const FlowModel& fm,
                       const std::vector<double>& capacities) {
  const int C = graph.num_commodities();
  for (LinkId l = 0; l < graph.num_links(); ++l) {
    std::vector<std::pair<int, double>> terms;
    for (CommodityId c = 0; c < C; ++c) {
      int v = fm.var[static_cast<std::size_t>(l) * C + c];
      if (v >= 0) terms.push_back({v, 1.0});
    }
    if (!terms.empty()) lp.add_row(std::move(terms), LinearProgram::Sense::le, capacities[l], "cap_" + std::to_string(l));
  }
}

Matrix extract_flows(const NetworkGraph& graph, const FlowModel& fm, const LpResult& r) {
  const int C = graph.num_commodities();
  Matrix flows(graph.num_links(), C);
  if (!r.optimal()) return flows;
  for (LinkId l = 0; l < graph.num_links(); ++l) {
    for (CommodityId c = 0; c < C; ++c) {
      int v = fm.var[static_cast<std::size_t>(l) * C + c];
      if (v >= 0) flows(l, c) = r.x[v];
    }
  }
  return flows;
}

std::vector<char> reaches_destination(const NetworkGraph& graph, CommodityId c) {
  std::vector<char> seen(graph.num_nodes(), 0);
  std::deque<NodeId> q{graph.destination(c)};
  seen[graph.destination(c)] = 1;
  while (!q.empty()) {
    NodeId b = q.front();
    q.pop_front();
    for (LinkId l : graph.in_links(b)) {
      NodeId a = graph.link(l).from;
      if (graph.allowed(c, l) && !seen[a]) {
        seen[a] = 1;
        q.push_back(a);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<double> expected_capacities(const NetworkGraph& graph, const RateModel& rates) {
  if (rates.num_actions() != 1) {
    throw std::invalid_argument("expected_capacities: needs a single-action rate model; supply capacities");
  }
  std::vector<double> caps(graph.num_links(), 0.0);
  for (int s = 0; s < rates.num_states(); ++s) {
    for (LinkId l = 0; l < graph.num_links(); ++l) caps[l] += rates.state_probability(s) * rates.rate(s, 0, l);
  }
  return caps;
}

Matrix positive_mask(const Matrix& lambda) {
  Matrix m(lambda.rows(), lambda.cols());
  for (std::size_t i = 0; i < lambda.rows(); ++i) {
    for (std::size_t j = 0; j < lambda.cols(); ++j) m(i, j) = lambda(i, j) > 0.0 ? 1.0 : 0.0;
  }
  return m;
}

Matrix non_destination_mask(const NetworkGraph& graph) {
  Matrix m(graph.num_nodes(), graph.num_commodities(), 1.0);
  for (CommodityId c = 0; c < graph.num_commodities(); ++c) m(graph.destination(c), c) = 0.0;
  return m;
}

MarginResult max_margin(const NetworkGraph& graph, const std::vector<double>& capacities, const Matrix& lambda,
                        const std::optional<Matrix>& active) {
  check_nc(graph, lambda, "max_margin");
  check_capacities(graph, capacities);
  const int N = graph.num_nodes();
  const int C = graph.num_commodities();
  Matrix mask = active ? *active : positive_mask(lambda);
  check_nc(graph, mask, "max_margin mask");
  for (CommodityId c = 0; c < C; ++c) {
    mask(graph.destination(c), c) = 0.0;
    if (lambda(graph.destination(c), c) != 0.0) throw std::invalid_argument("max_margin: demand at a destination");
  }
  for (double v : lambda.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("max_margin: demands must be finite and >= 0");
  }

  MarginResult out;
  double shift = std::numeric_limits<double>::infinity();
  for (NodeId n = 0; n < N; ++n) {
    for (CommodityId c = 0; c < C; ++c) {
      if (mask(n, c) != 0.0) shift = std::min(shift, lambda(n, c));
    }
  }
  if (!std::isfinite(shift)) throw std::invalid_argument("max_margin: no active pairs; supply a mask");

  for (CommodityId c = 0; c < C; ++c) {
    auto reach = reaches_destination(graph, c);
    for (NodeId n = 0; n < N; ++n) {
      if ((lambda(n, c) > 0.0 || mask(n, c) != 0.0) && !reach[n]) {
        out.disconnected.push_back(c);
        break;
      }
    }
  }
  if (!out.disconnected.empty()) {
    out.connected = false;
    out.feasible = false;
    out.eps = -std::numeric_limits<double>::infinity();
    out.flows = Matrix(graph.num_links(), C);
    return out;
  }

  LinearProgram& lp = out.lp;
  FlowModel fm = add_flow_variables(lp, graph);
  // e = eps + shift >= 0 keeps every active demand nonnegative.
  const int e = lp.add_var(1.0, "eps_shifted");
  for (NodeId n = 0; n < N; ++n) {
    for (CommodityId c = 0; c < C; ++c) {
      if (n == graph.destination(c)) continue;
      auto terms = net_outflow(graph, fm, n, c);
      if (mask(n, c) != 0.0) terms.push_back({e, -mask(n, c)});
      if (terms.empty() && lambda(n, c) == 0.0) continue;
      lp.add_row(std::move(terms), LinearProgram::Sense::eq, lambda(n, c) - shift * mask(n, c),
                 "flow_" + std::to_string(n) + "_" + std::to_string(c));
    }
  }
  add_capacity_rows(lp, graph, fm, capacities);

  out.lp_result = solve_lp(lp);
  if (out.lp_result.status == LpResult::Status::infeasible) {
    out.eps = -shift;
    out.eps_at_lower_bound = true;
    out.feasible = false;
    out.flows = Matrix(graph.num_links(), C);
    return out;
  }
  if (!out.lp_result.optimal()) {
    throw std::runtime_error("max_margin: LP " + status_name(out.lp_result.status));
  }
  out.eps = out.lp_result.x[e] - shift;
  out.feasible = out.eps >= -1e-9;
  out.flows = extract_flows(graph, fm, out.lp_result);
  return out;
}

double flow_violation(const NetworkGraph& graph, const std::vector<double>& capacities, const Matrix& flows,
                      const Matrix& demand) {
  const int C = graph.num_commodities();
  double worst = 0.0;
  for (LinkId l = 0; l < graph.num_links(); ++l) {
    double total = 0.0;
    for (CommodityId c = 0; c < C; ++c) {
      if (flows(l, c) < 0.0) worst = std::max(worst, -flows(l, c));
      if (flows(l, c) != 0.0 && !graph.allowed(c, l)) worst = std::max(worst, std::abs(flows(l, c)));
      total += flows(l, c);
    }
    worst = std::max(worst, total - capacities[l]);
  }
  for (NodeId n = 0; n < graph.num_nodes(); ++n) {
    for (CommodityId c = 0; c < C; ++c) {
      if (n == graph.destination(c)) continue;
      double net = 0.0;
      for (LinkId l : graph.out_links(n)) net += flows(l, c);
      for (LinkId l : graph.in_links(n)) net -= flows(l, c);
      worst = std::max(worst, std::abs(net - demand(n, c)));
    }
  }
  return worst;
}

ThetaOptimalResult theta_optimal_rates(const NetworkGraph& graph, const std::vector<double>& capacities,
                                       const Matrix& lambda, const Matrix& theta, const UtilitySpec& utility,
                                       double tolerance, int max_cuts) {
  check_nc(graph, lambda, "theta_optimal_rates");
  check_nc(graph, theta, "theta_optimal_rates theta");
  check_capacities(graph, capacities);
  const int N = graph.num_nodes();
  const int C = graph.num_commodities();

  LinearProgram lp;
  FlowModel fm = add_flow_variables(lp, graph);
  struct Pair {
    NodeId n;
    CommodityId c;
    int r;
    int t;  // epigraph variable, shifted by kFloor
  };
  constexpr double kFloor = 100.0;
  const bool concave = utility.kind == UtilitySpec::Kind::log;
  std::vector<Pair> pairs;
  for (NodeId n = 0; n < N; ++n) {
    for (CommodityId c = 0; c < C; ++c) {
      if (n == graph.destination(c) || !(lambda(n, c) > 0.0)) continue;
      Pair p{n, c, -1, -1};
      const double lin = utility.kind == UtilitySpec::Kind::linear ? utility.weight : 0.0;
      p.r = lp.add_var(lin, "r_" + std::to_string(n) + "_" + std::to_string(c));
      if (concave) p.t = lp.add_var(1.0, "t_" + std::to_string(n) + "_" + std::to_string(c));
      pairs.push_back(p);
    }
  }
  std::vector<int> r_of(static_cast<std::size_t>(N) * C, -1);
  for (const Pair& p : pairs) r_of[static_cast<std::size_t>(p.n) * C + p.c] = p.r;
  for (NodeId n = 0; n < N; ++n) {
    for (CommodityId c = 0; c < C; ++c) {
      if (n == graph.destination(c)) continue;
      auto terms = net_outflow(graph, fm, n, c);
      const int r = r_of[static_cast<std::size_t>(n) * C + c];
      if (r >= 0) terms.push_back({r, -1.0});
      if (terms.empty() && theta(n, c) == 0.0) continue;
      lp.add_row(std::move(terms), LinearProgram::Sense::eq, theta(n, c));
    }
  }
  add_capacity_rows(lp, graph, fm, capacities);
  for (const Pair& p : pairs) lp.add_row({{p.r, 1.0}}, LinearProgram::Sense::le, lambda(p.n, p.c));

  // Tangent of w log at x0 in shifted form: t' - (w / x0) r <= w log x0 - w + kFloor.
  auto add_cut = [&](const Pair& p, double x0) {
    const double w = utility.weight;
    lp.add_row({{p.t, 1.0}, {p.r, -w / x0}}, LinearProgram::Sense::le, w * std::log(x0) - w + kFloor);
  };
  ThetaOptimalResult out;
  out.rates = Matrix(N, C);
  if (concave) {
    for (const Pair& p : pairs) {
      for (int k = 0; k <= 24; k += 2) add_cut(p, lambda(p.n, p.c) * std::ldexp(1.0, -k));
    }
  }

  LpResult res;
  while (true) {
    res = solve_lp(lp);
    if (res.status == LpResult::Status::infeasible) return out;
    if (!res.optimal()) throw std::runtime_error("theta_optimal_rates: LP " + status_name(res.status));
    if (!concave) break;
    double gap = 0.0;
    std::vector<std::pair<const Pair*, double>> violated;
    for (const Pair& p : pairs) {
      const double r = res.x[p.r];
      const double t = res.x[p.t] - kFloor;
      const double h = utility.value(std::max(r, 1e-300));
      const double g = t - h;
      gap += std::max(0.0, g);
      if (g > tolerance / std::max<std::size_t>(1, pairs.size())) violated.push_back({&p, std::max(r, 1e-12)});
    }
    out.gap = gap;
    if (gap <= tolerance || violated.empty() || out.cuts >= max_cuts) break;
    for (auto& [p, x0] : violated) {
      add_cut(*p, x0);
      ++out.cuts;
    }
  }
  out.feasible = true;
  for (const Pair& p : pairs) out.rates(p.n, p.c) = res.x[p.r];
  for (const Pair& p : pairs) out.utility += utility.value(out.rates(p.n, p.c));
  return out;
}

Matrix eps_z(const NetworkGraph& graph, double max_rate, double z) {
  if (!(z > 0.0)) throw std::invalid_argument("eps_z: z must be positive");
  Matrix m(graph.num_nodes(), graph.num_commodities());
  if (std::isinf(z)) return m;
  for (CommodityId c = 0; c < graph.num_commodities(); ++c) {
    const double v = 2.0 * max_rate * graph.allowed_link_count(c) / z;
    for (NodeId n = 0; n < graph.num_nodes(); ++n) m(n, c) = v;
  }
  return m;
}

MarginSplit split_margin(const NetworkGraph& graph, double eps_max, const Matrix& ez) {
  check_nc(graph, ez, "split_margin");
  MarginSplit s;
  s.eps = Matrix(graph.num_nodes(), graph.num_commodities());
  s.delta = Matrix(graph.num_nodes(), graph.num_commodities());
  s.valid = true;
  for (NodeId n = 0; n < graph.num_nodes(); ++n) {
    for (CommodityId c = 0; c < graph.num_commodities(); ++c) {
      const double slack = eps_max - ez(n, c);
      if (n != graph.destination(c) && !(slack > 0.0)) s.valid = false;
      s.eps(n, c) = ez(n, c) + 0.5 * slack;
      s.delta(n, c) = 0.5 * slack;
    }
  }
  return s;
}

}  // namespace bpsim
