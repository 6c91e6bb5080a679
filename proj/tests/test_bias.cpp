#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "bpsim/bias.hpp"
#include "doctest.h"

using namespace bpsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum over all simple paths n -> dest of the backlog sum of the nodes
// after n, by explicit stack enumeration.
double brute_force_min(const NetworkGraph& g, const Matrix& U, NodeId n, CommodityId c) {
  const NodeId dest = g.destination(c);
  if (n == dest) return 0.0;
  struct Frame {
    NodeId node;
    double sum;
    std::vector<char> seen;
  };
  double best = kInf;
  std::vector<Frame> stack;
  std::vector<char> seen(g.num_nodes(), 0);
  seen[n] = 1;
  stack.push_back({n, 0.0, seen});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.node == dest) {
      best = std::min(best, f.sum);
      continue;
    }
    for (LinkId l : g.out_links(f.node)) {
      if (!g.allowed(c, l)) continue;
      const NodeId k = g.link(l).to;
      if (f.seen[k]) continue;
      Frame next{k, f.sum + (k == dest ? 0.0 : U(k, c)), f.seen};
      next.seen[k] = 1;
      stack.push_back(std::move(next));
    }
  }
  return best;
}

NetworkGraph random_dag(std::mt19937_64& rng, int n, double p) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Link> links;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (unit(rng) < p) links.push_back({a, b});
    }
  }
  NetworkGraph g(n, links);
  g.add_commodity(n - 1);
  return g;
}

Matrix random_backlog(std::mt19937_64& rng, const NetworkGraph& g, int max_value) {
  std::uniform_int_distribution<int> pick(0, max_value);
  Matrix U(g.num_nodes(), g.num_commodities());
  for (NodeId n = 0; n < g.num_nodes(); ++n) {
    for (CommodityId c = 0; c < g.num_commodities(); ++c) {
      if (n != g.destination(c)) U(n, c) = pick(rng);
    }
  }
  return U;
}

}  // namespace

TEST_CASE("next-hop bias examples") {
  NetworkGraph g(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  g.add_commodity(3);
  Matrix U(4, 1);
  U(1, 0) = 3;
  U(2, 0) = 5;
  CHECK(bias_next_hop(g, U, 1.0)(0, 0) == 3.0);
  CHECK(bias_next_hop(g, U, 1.0)(3, 0) == 0.0);
  CHECK(bias_next_hop(g, Matrix(4, 1), 1.0).sum() == 0.0);

  NetworkGraph h(5, {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {3, 4}});
  h.add_commodity(4);
  Matrix V(5, 1);
  V(1, 0) = 2;
  V(2, 0) = 2;
  V(3, 0) = 7;
  CHECK(bias_next_hop(h, V, 2.0)(0, 0) == 1.0);
  // The tie-averaged general form gives the same value.
  CHECK(general_bias(h, V, next_hop_weights(), 2.0)(0, 0) == 1.0);
  CHECK_THROWS(bias_next_hop(h, V, 0.0));
}

TEST_CASE("min-downstream bias on a diamond") {
  NetworkGraph g(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  g.add_commodity(3);
  Matrix U(4, 1);
  U(1, 0) = 4;
  U(2, 0) = 1;
  const DownstreamSums s = min_downstream_sums(g, U);
  CHECK(s.sums(0, 0) == 1.0);
  CHECK(bias_min_downstream(g, U, 4.0)(0, 0) == 0.25);
  CHECK(bias_min_downstream(g, Matrix(4, 1), 1.0).sum() == 0.0);
}

TEST_CASE("property: Bellman-Ford equals brute-force path minimum on 100 random DAGs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(3, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkGraph g = random_dag(rng, size(rng), 0.45);
    const Matrix U = random_backlog(rng, g, 9);
    const DownstreamSums s = min_downstream_sums(g, U);
    for (NodeId n = 0; n < g.num_nodes(); ++n) CHECK(s.sums(n, 0) == brute_force_min(g, U, n, 0));
  }
}

TEST_CASE("Bellman-Ford equals brute force on random graphs with cycles") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 6;
    std::vector<Link> links;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a != b && unit(rng) < 0.35) links.push_back({a, b});
      }
    }
    NetworkGraph g(n, links);
    g.add_commodity(0);
    g.add_commodity(n - 1);
    const Matrix U = random_backlog(rng, g, 5);
    const DownstreamSums s = min_downstream_sums(g, U);
    for (CommodityId c = 0; c < 2; ++c) {
      for (NodeId v = 0; v < n; ++v) CHECK(s.sums(v, c) == brute_force_min(g, U, v, c));
    }
  }
}

TEST_CASE("general bias with tie-averaged path weights reproduces the specialised biases") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const NetworkGraph g = random_dag(rng, 7, 0.5);
    const Matrix U = random_backlog(rng, g, 3);
    const Matrix a = bias_min_downstream(g, U, 2.0);
    const Matrix b = general_bias(g, U, min_downstream_weights(), 2.0);
    const Matrix c = bias_next_hop(g, U, 2.0);
    const Matrix d = general_bias(g, U, next_hop_weights(), 2.0);
    for (NodeId n = 0; n < g.num_nodes(); ++n) {
      if (std::isfinite(a(n, 0))) CHECK(b(n, 0) == doctest::Approx(a(n, 0)));
      CHECK(d(n, 0) == doctest::Approx(c(n, 0)));
    }
  }
}

TEST_CASE("unreachable pairs are reported") {
  NetworkGraph g(3, {{0, 1}});
  g.add_commodity(1);
  const DownstreamSums s = min_downstream_sums(g, Matrix(3, 1));
  CHECK(s.sums(0, 0) == 0.0);
  CHECK(s.sums(2, 0) == kUnreachable);
  CHECK(s.unreachable_pairs == 1);
}

TEST_CASE("shortest-path bias") {
  NetworkGraph line(3, {{0, 1}, {1, 2}});
  line.add_commodity(2);
  CHECK(bias_shortest_path(line, 0.0).sum() == 0.0);
  const Matrix b = bias_shortest_path(line, 1.0);
  CHECK(b(0, 0) == 2.0);
  CHECK(b(1, 0) == 1.0);
  CHECK(b(2, 0) == 0.0);

  NetworkGraph grid = build_clustered_grid(4, 4, 2, 2, 3);
  grid.add_commodity(*grid.node_at(2, 5));
  grid.add_commodity(*grid.node_at(6, 6));
  const Matrix sp = bias_shortest_path(grid, 2.0);
  for (CommodityId c = 0; c < 2; ++c) {
    // Forward BFS from every node (independent of the reverse search).
    for (NodeId src = 0; src < grid.num_nodes(); ++src) {
      std::vector<int> dist(grid.num_nodes(), -1);
      std::deque<NodeId> q{src};
      dist[src] = 0;
      while (!q.empty()) {
        const NodeId a = q.front();
        q.pop_front();
        for (LinkId l : grid.out_links(a)) {
          const NodeId b2 = grid.link(l).to;
          if (dist[b2] < 0) {
            dist[b2] = dist[a] + 1;
            q.push_back(b2);
          }
        }
      }
      CHECK(sp(src, c) == 2.0 * dist[grid.destination(c)]);
    }
  }
}

TEST_CASE("min_z") {
  CHECK(min_z(1.0, 5, 0.5) == 20.0);
  CHECK(min_z(1.0, 1, 2.0) == 1.0);
  CHECK(min_z(2.0, 3, 0.1) == doctest::Approx(120.0));
  CHECK_THROWS(min_z(1.0, 5, 0.0));
}

TEST_CASE("bias evaluator splits static and dynamic parts") {
  NetworkGraph g(3, {{0, 1}, {1, 2}});
  g.add_commodity(2);
  BiasEvaluator e(g, BiasSpec::composite({BiasSpec::next_hop(1.0), BiasSpec::shortest_path(2.0)}));
  CHECK(e.has_static());
  CHECK(e.has_dynamic());
  CHECK(e.static_bias()(0, 0) == 4.0);
  Matrix U(3, 1);
  U(1, 0) = 6;
  CHECK(e.dynamic_bias(U)(0, 0) == 6.0);
  CHECK_THROWS_AS(BiasSpec::next_hop(0.0).validate(), ConfigError);
}
