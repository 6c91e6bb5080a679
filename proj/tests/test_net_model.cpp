#include <algorithm>
#include <queue>
#include <set>

#include "bpsim/graph.hpp"
#include "bpsim/rate_model.hpp"
#include "doctest.h"

using namespace bpsim;

namespace {

std::set<std::pair<int, int>> link_set(const NetworkGraph& g) {
  std::set<std::pair<int, int>> s;
  for (const Link& l : g.links()) s.insert({l.from, l.to});
  return s;
}

// In-degree over the full link set, counted directly from the link list.
int oracle_in_degree(const NetworkGraph& g) {
  std::vector<int> deg(g.num_nodes(), 0);
  for (const Link& l : g.links()) ++deg[l.to];
  return *std::max_element(deg.begin(), deg.end());
}

}  // namespace

TEST_CASE("grid without extras has only the 4-neighbour links") {
  const NetworkGraph g = build_clustered_grid(4, 4, 0, 0, 9);
  CHECK(g.num_nodes() == 64);
  CHECK(g.num_links() == 192);
  const auto links = link_set(g);
  CHECK(links.size() == 192u);
  for (const Link& l : g.links()) {
    const GridPosition& a = g.positions()[l.from];
    const GridPosition& b = g.positions()[l.to];
    CHECK(a.cluster == b.cluster);
    CHECK(std::abs(a.row - b.row) + std::abs(a.col - b.col) == 1);
  }
}

TEST_CASE("2x2 single cluster") {
  const NetworkGraph g = build_clustered_grid(1, 2, 0, 0, 1);
  CHECK(g.num_nodes() == 4);
  CHECK(g.num_links() == 8);
  CHECK(max_in_degree(g) == 2);
}

TEST_CASE("default topology: 224 links, d_in = 5, bidirectional, no duplicates") {
  const NetworkGraph g = build_clustered_grid(4, 4, 2, 2, 3);
  CHECK(g.num_nodes() == 64);
  CHECK(g.num_links() == 224);
  CHECK(max_in_degree(g) == 5);
  CHECK(oracle_in_degree(g) == 5);
  const auto links = link_set(g);
  CHECK(links.size() == 224u);
  int inter = 0;
  for (const Link& l : g.links()) {
    CHECK(l.from != l.to);
    CHECK(links.count({l.to, l.from}) == 1);
    const GridPosition& a = g.positions()[l.from];
    const GridPosition& b = g.positions()[l.to];
    if (a.cluster != b.cluster) {
      ++inter;
      // Inter-cluster links join facing nodes one global step apart.
      CHECK(std::abs(a.global_row - b.global_row) + std::abs(a.global_col - b.global_col) == 1);
    }
  }
  CHECK(inter == 16);
}

TEST_CASE("generator is deterministic per seed") {
  CHECK(build_clustered_grid(4, 4, 2, 2, 3) == build_clustered_grid(4, 4, 2, 2, 3));
  CHECK_FALSE(build_clustered_grid(4, 4, 2, 2, 3) == build_clustered_grid(4, 4, 2, 2, 4));
}

TEST_CASE("node ids follow cluster-major, row-major layout") {
  const NetworkGraph g = build_clustered_grid(4, 4, 0, 0, 1);
  for (int gr = 0; gr < 8; ++gr) {
    for (int gc = 0; gc < 8; ++gc) {
      const int cluster = (gr / 4) * 2 + gc / 4;
      const auto n = g.node_at(gr, gc);
      REQUIRE(n.has_value());
      CHECK(*n == cluster * 16 + (gr % 4) * 4 + gc % 4);
    }
  }
  CHECK_FALSE(g.node_at(8, 0).has_value());
}

TEST_CASE("single link and commodity restrictions") {
  NetworkGraph g(2, {{0, 1}});
  CHECK(max_in_degree(g) == 1);
  NetworkGraph h(3, {{0, 1}, {1, 2}, {0, 2}});
  const CommodityId c = h.add_commodity(2);
  CHECK(h.allowed_link_count(c) == 3);
  const std::vector<LinkId> keep{0, 1};
  h.restrict_commodity(c, keep);
  CHECK(h.allowed(c, 0));
  CHECK_FALSE(h.allowed(c, 2));
  CHECK(h.allowed_link_count(c) == 2);
  CHECK(h.allowed_row(2)[c] == 0);
  CHECK(h.allowed_row(1)[c] == 1);
}

TEST_CASE("graph validation") {
  CHECK_THROWS_AS(NetworkGraph(2, {{0, 2}}), ConfigError);
  CHECK_THROWS_AS(NetworkGraph(2, {{1, 1}}), ConfigError);
  NetworkGraph g(2, {{0, 1}});
  CHECK_THROWS_AS(g.add_commodity(5), ConfigError);
  CHECK_THROWS_AS(build_clustered_grid(3, 4, 0, 0, 1), ConfigError);
  CHECK_THROWS_AS(build_clustered_grid(4, 4, 0, 5, 1), ConfigError);
}

TEST_CASE("graph JSON round trip") {
  NetworkGraph g = build_clustered_grid(4, 4, 2, 2, 3);
  g.add_commodity(10);
  const CommodityId c = g.add_commodity(20);
  const std::vector<LinkId> keep{0, 1, 2, 3};
  g.restrict_commodity(c, keep);
  CHECK(graph_from_json(graph_to_json(g)) == g);
  CHECK_THROWS_AS(graph_from_json("{not json"), ConfigError);
}

TEST_CASE("wireline rate model") {
  const NetworkGraph g = build_clustered_grid(4, 4, 2, 2, 3);
  const RateModel r = wireline_rate_model(g, 1.0);
  CHECK(r.num_states() == 1);
  CHECK(r.num_actions() == 1);
  CHECK(r.max_rate() == 1.0);
  for (LinkId l = 0; l < g.num_links(); ++l) CHECK(r.rate(0, 0, l) == 1.0);
  // Non-adjacent pair (two corners of one cluster, no chord) has rate zero.
  NodeId a = 0, b = 15;
  if (!g.find_link(a, b)) CHECK(r.rate(g, 0, 0, a, b) == 0.0);
  CHECK(wireline_rate_model(g, 2.0).max_rate() == 2.0);
  CHECK_THROWS_AS(wireline_rate_model(g, 0.0), ConfigError);
}

TEST_CASE("general rate model validation and sampling") {
  NetworkGraph g(2, {{0, 1}, {1, 0}});
  CHECK_THROWS_AS(RateModel(g, {0.5, 0.4}, 1, std::vector<double>(4, 1.0)), ConfigError);
  CHECK_THROWS_AS(RateModel(g, {1.0}, 0, {}), ConfigError);
  CHECK_THROWS_AS(RateModel(g, {1.0}, 1, {1.0}), ConfigError);
  const RateModel r(g, {0.25, 0.75}, 2, {1, 0, 0, 1, 2, 2, 0, 0});
  CHECK(r.sample_state(0.1) == 0);
  CHECK(r.sample_state(0.3) == 1);
  CHECK(r.max_rate() == 2.0);
  CHECK(r.max_out_rate(g, 0) == 2.0);
}
