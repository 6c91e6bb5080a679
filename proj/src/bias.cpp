#include "bpsim/bias.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace bpsim {

namespace {

void check_backlog(const NetworkGraph& graph, const Matrix& backlog) {
  if (backlog.rows() != static_cast<std::size_t>(graph.num_nodes()) ||
      backlog.cols() != static_cast<std::size_t>(graph.num_commodities())) {
    throw std::invalid_argument("bias: backlog matrix has the wrong shape");
  }
}

void check_z(double z) {
  if (!(z > 0.0)) throw std::invalid_argument("bias: z must be positive");
}

// Hop distance to dest(c) within L^(c), by reverse BFS.
std::vector<int> hops_to_destination(const NetworkGraph& graph, CommodityId c) {
  std::vector<int> hops(graph.num_nodes(), -1);
  std::deque<NodeId> frontier;
  hops[graph.destination(c)] = 0;
  frontier.push_back(graph.destination(c));
  while (!frontier.empty()) {
    NodeId b = frontier.front();
    frontier.pop_front();
    for (LinkId l : graph.in_links(b)) {
      if (!graph.allowed(c, l)) continue;
      NodeId a = graph.link(l).from;
      if (hops[a] < 0) {
        hops[a] = hops[b] + 1;
        frontier.push_back(a);
      }
    }
  }
  return hops;
}

// Per-commodity relaxation order: links of L^(c) not leaving dest(c), sorted
// by the receive node's hop distance so one sweep settles most nodes.
std::vector<std::vector<RelaxEdge>> relaxation_order(const NetworkGraph& graph) {
  std::vector<std::vector<RelaxEdge>> order(graph.num_commodities());
  for (CommodityId c = 0; c < graph.num_commodities(); ++c) {
    auto hops = hops_to_destination(graph, c);
    for (LinkId l = 0; l < graph.num_links(); ++l) {
      const Link& k = graph.link(l);
      if (!graph.allowed(c, l) || k.from == graph.destination(c) || hops[k.to] < 0) continue;
      order[c].push_back({k.from, k.to});
    }
    std::stable_sort(order[c].begin(), order[c].end(),
                     [&](const RelaxEdge& x, const RelaxEdge& y) { return hops[x.to] < hops[y.to]; });
  }
  return order;
}

void bellman_ford(const NetworkGraph& graph, const Matrix& backlog,
                  const std::vector<std::vector<RelaxEdge>>& order, DownstreamSums& out) {
  const int nodes = graph.num_nodes();
  const int commodities = graph.num_commodities();
  if (out.sums.rows() != static_cast<std::size_t>(nodes) ||
      out.sums.cols() != static_cast<std::size_t>(commodities)) {
    out.sums = Matrix(nodes, commodities);
  }
  out.rounds = 0;
  out.unreachable_pairs = 0;
  thread_local std::vector<double> dist, cost;
  dist.resize(nodes);
  cost.resize(nodes);
  for (CommodityId c = 0; c < commodities; ++c) {
    const NodeId dest = graph.destination(c);
    for (NodeId n = 0; n < nodes; ++n) {
      dist[n] = kUnreachable;
      cost[n] = backlog(n, c);
    }
    dist[dest] = 0.0;
    cost[dest] = 0.0;
    int round = 0;
    bool changed = true;
    while (changed && round < nodes) {
      changed = false;
      ++round;
      for (const RelaxEdge& e : order[c]) {
        const double candidate = cost[e.to] + dist[e.to];
        if (candidate < dist[e.from]) {
          dist[e.from] = candidate;
          changed = true;
        }
      }
    }
    out.rounds = std::max(out.rounds, round);
    for (NodeId n = 0; n < nodes; ++n) {
      out.sums(n, c) = dist[n];
      if (dist[n] == kUnreachable) ++out.unreachable_pairs;
    }
  }
}

}  // namespace

void bias_next_hop_into(const NetworkGraph& graph, const Matrix& backlog, double z, Matrix& out) {
  check_backlog(graph, backlog);
  check_z(z);
  const int nodes = graph.num_nodes();
  const int commodities = graph.num_commodities();
  if (out.rows() != static_cast<std::size_t>(nodes) ||
      out.cols() != static_cast<std::size_t>(commodities)) {
    out = Matrix(nodes, commodities);
  }
  for (NodeId n = 0; n < nodes; ++n) {
    auto links = graph.out_links(n);
    for (CommodityId c = 0; c < commodities; ++c) {
      if (n == graph.destination(c)) {
        out(n, c) = 0.0;
        continue;
      }
      double best = kUnreachable;
      for (LinkId l : links) {
        if (graph.allowed(c, l)) best = std::min(best, backlog(graph.link(l).to, c));
      }
      out(n, c) = best == kUnreachable ? 0.0 : best / z;
    }
  }
}

Matrix bias_next_hop(const NetworkGraph& graph, const Matrix& backlog, double z) {
  Matrix out;
  bias_next_hop_into(graph, backlog, z, out);
  return out;
}

void min_downstream_sums_into(const NetworkGraph& graph, const Matrix& backlog, DownstreamSums& out) {
  check_backlog(graph, backlog);
  bellman_ford(graph, backlog, relaxation_order(graph), out);
}

DownstreamSums min_downstream_sums(const NetworkGraph& graph, const Matrix& backlog) {
  DownstreamSums out;
  min_downstream_sums_into(graph, backlog, out);
  return out;
}

Matrix bias_min_downstream(const NetworkGraph& graph, const Matrix& backlog, double z) {
  check_z(z);
  DownstreamSums sums = min_downstream_sums(graph, backlog);
  for (double& v : sums.sums.values()) {
    if (v != kUnreachable) v /= z;
  }
  return sums.sums;
}

Matrix bias_shortest_path(const NetworkGraph& graph, double per_link_cost) {
  if (!(per_link_cost >= 0.0)) throw std::invalid_argument("shortest-path bias: B must be >= 0");
  Matrix out(graph.num_nodes(), graph.num_commodities());
  for (CommodityId c = 0; c < graph.num_commodities(); ++c) {
    auto hops = hops_to_destination(graph, c);
    for (NodeId n = 0; n < graph.num_nodes(); ++n) {
      out(n, c) = hops[n] < 0 ? kUnreachable : per_link_cost * hops[n];
    }
  }
  return out;
}

double min_z(double max_rate, int in_degree, double eps_min) {
  if (!(eps_min > 0.0)) {
    throw std::invalid_argument("min_z: margin must be positive (no finite z exists at zero margin)");
  }
  return 2.0 * max_rate * in_degree / eps_min;
}

Matrix general_bias(const NetworkGraph& graph, const Matrix& backlog, const WeightRule& rule, double z) {
  check_backlog(graph, backlog);
  check_z(z);
  Matrix out(graph.num_nodes(), graph.num_commodities());
  for (NodeId n = 0; n < graph.num_nodes(); ++n) {
    for (CommodityId c = 0; c < graph.num_commodities(); ++c) {
      if (n == graph.destination(c)) continue;
      double f = 0.0;
      for (const BiasWeight& w : rule(graph, backlog, n, c)) {
        if (w.weight < 0.0 || w.weight > 1.0) throw std::invalid_argument("general bias: weight outside [0, 1]");
        f += w.weight * backlog(w.node, c) / z;
      }
      out(n, c) = f;
    }
  }
  return out;
}

WeightRule next_hop_weights() {
  return [](const NetworkGraph& graph, const Matrix& backlog, NodeId n, CommodityId c) {
    std::vector<BiasWeight> weights;
    double best = kUnreachable;
    for (LinkId l : graph.out_links(n)) {
      if (graph.allowed(c, l)) best = std::min(best, backlog(graph.link(l).to, c));
    }
    if (best == kUnreachable) return weights;
    for (LinkId l : graph.out_links(n)) {
      NodeId k = graph.link(l).to;
      if (graph.allowed(c, l) && backlog(k, c) == best) weights.push_back({k, 1.0});
    }
    for (auto& w : weights) w.weight = 1.0 / static_cast<double>(weights.size());
    return weights;
  };
}

WeightRule min_downstream_weights() {
  return [](const NetworkGraph& graph, const Matrix& backlog, NodeId n, CommodityId c) {
    const NodeId dest = graph.destination(c);
    std::vector<std::vector<NodeId>> minimal;
    double best = kUnreachable;
    std::vector<NodeId> path;
    std::vector<char> on_path(graph.num_nodes(), 0);
    // Depth-first enumeration of simple paths n -> dest.
    std::function<void(NodeId, double)> walk = [&](NodeId at, double sum) {
      if (at == dest) {
        if (sum < best) {
          best = sum;
          minimal.clear();
        }
        if (sum == best) minimal.push_back(path);
        return;
      }
      for (LinkId l : graph.out_links(at)) {
        if (!graph.allowed(c, l)) continue;
        NodeId next = graph.link(l).to;
        if (on_path[next] || next == n) continue;
        on_path[next] = 1;
        path.push_back(next);
        walk(next, sum + backlog(next, c));
        path.pop_back();
        on_path[next] = 0;
      }
    };
    on_path[n] = 1;
    walk(n, 0.0);
    std::map<NodeId, double> counts;
    for (const auto& p : minimal) {
      for (NodeId k : p) counts[k] += 1.0;
    }
    std::vector<BiasWeight> weights;
    for (const auto& [k, count] : counts) {
      weights.push_back({k, count / static_cast<double>(minimal.size())});
    }
    return weights;
  };
}

BiasSpec BiasSpec::next_hop(double z) {
  BiasSpec s;
  s.kind = Kind::next_hop;
  s.z = z;
  return s;
}

BiasSpec BiasSpec::min_downstream(double z) {
  BiasSpec s;
  s.kind = Kind::min_downstream;
  s.z = z;
  return s;
}

BiasSpec BiasSpec::shortest_path(double per_link_cost) {
  BiasSpec s;
  s.kind = Kind::shortest_path;
  s.per_link_cost = per_link_cost;
  return s;
}

BiasSpec BiasSpec::composite(std::vector<BiasSpec> members) {
  BiasSpec s;
  s.kind = Kind::composite;
  s.members = std::move(members);
  return s;
}

void BiasSpec::validate() const {
  switch (kind) {
    case Kind::next_hop:
    case Kind::min_downstream:
      if (!(z > 0.0)) throw ConfigError("bias: z must be positive");
      break;
    case Kind::shortest_path:
      if (!(per_link_cost >= 0.0)) throw ConfigError("bias: B must be non-negative");
      break;
    case Kind::composite:
      for (const auto& m : members) m.validate();
      break;
    case Kind::custom:
      if (!custom) throw ConfigError("bias: custom bias has no callable");
      break;
    case Kind::zero: break;
  }
}

bool BiasSpec::is_dynamic() const {
  switch (kind) {
    case Kind::next_hop:
    case Kind::min_downstream:
    case Kind::custom: return true;
    case Kind::composite:
      return std::any_of(members.begin(), members.end(), [](const BiasSpec& m) { return m.is_dynamic(); });
    default: return false;
  }
}

BiasEvaluator::BiasEvaluator(const NetworkGraph& graph, BiasSpec spec)
    : graph_(&graph), spec_(std::move(spec)) {
  spec_.validate();
  const int nodes = graph.num_nodes();
  const int commodities = graph.num_commodities();
  static_ = Matrix(nodes, commodities);
  dynamic_ = Matrix(nodes, commodities);
  std::function<void(const BiasSpec&)> collect_static = [&](const BiasSpec& s) {
    if (s.kind == BiasSpec::Kind::shortest_path) {
      static_ += bias_shortest_path(graph, s.per_link_cost);
      has_static_ = true;
    } else if (s.kind == BiasSpec::Kind::composite) {
      for (const auto& m : s.members) collect_static(m);
    }
  };
  collect_static(spec_);
  has_dynamic_ = spec_.is_dynamic();
  order_ = relaxation_order(graph);
}

void BiasEvaluator::accumulate(const BiasSpec& s, const Matrix& backlog) {
  switch (s.kind) {
    case BiasSpec::Kind::next_hop:
      bias_next_hop_into(*graph_, backlog, s.z, scratch_);
      dynamic_ += scratch_;
      break;
    case BiasSpec::Kind::min_downstream: {
      bellman_ford(*graph_, backlog, order_, sums_);
      if (sums_.unreachable_pairs > 0) ++unreachable_reports_;
      auto src = sums_.sums.values();
      auto dst = dynamic_.values();
      for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i] == kUnreachable ? kUnreachable : src[i] / s.z;
      }
      break;
    }
    case BiasSpec::Kind::custom: {
      Matrix f = s.custom(*graph_, backlog);
      if (f.rows() != dynamic_.rows() || f.cols() != dynamic_.cols()) {
        throw std::invalid_argument("custom bias returned a matrix of the wrong shape");
      }
      for (double v : f.values()) {
        if (v < 0.0) throw std::invalid_argument("custom bias returned a negative value");
      }
      dynamic_ += f;
      break;
    }
    case BiasSpec::Kind::composite:
      for (const auto& m : s.members) accumulate(m, backlog);
      break;
    default: break;
  }
}

const Matrix& BiasEvaluator::dynamic_bias(const Matrix& backlog) {
  check_backlog(*graph_, backlog);
  dynamic_.fill(0.0);
  if (has_dynamic_) accumulate(spec_, backlog);
  return dynamic_;
}

}  // namespace bpsim
