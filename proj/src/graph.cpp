#include "bpsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "json.hpp"

#include "bpsim/rng.hpp"

namespace bpsim {

using nlohmann::json;

NetworkGraph::NetworkGraph(int num_nodes, std::vector<Link> links)
    : num_nodes_(num_nodes), links_(std::move(links)), out_(num_nodes), in_(num_nodes) {
  if (num_nodes < 0) throw ConfigError("graph: negative node count");
  for (LinkId l = 0; l < num_links(); ++l) {
    const Link& k = links_[l];
    if (k.from < 0 || k.from >= num_nodes || k.to < 0 || k.to >= num_nodes) {
      throw ConfigError("graph: link " + std::to_string(l) + " has an endpoint outside the node set");
    }
    if (k.from == k.to) {
      throw ConfigError("graph: self-loop at node " + std::to_string(k.from));
    }
    out_[k.from].push_back(l);
    in_[k.to].push_back(l);
  }
}

std::optional<LinkId> NetworkGraph::find_link(NodeId from, NodeId to) const {
  if (from < 0 || from >= num_nodes_) return std::nullopt;
  for (LinkId l : out_[from]) {
    if (links_[l].to == to) return l;
  }
  return std::nullopt;
}

CommodityId NetworkGraph::add_commodity(NodeId destination) {
  if (destination < 0 || destination >= num_nodes_) {
    throw ConfigError("graph: commodity destination " + std::to_string(destination) +
                      " is not a node");
  }
  dest_.push_back(destination);
  allowed_.emplace_back(links_.size(), std::uint8_t{1});
  rebuild_link_mask();
  return static_cast<CommodityId>(dest_.size() - 1);
}

void NetworkGraph::restrict_commodity(CommodityId c, std::span<const LinkId> allowed) {
  auto& mask = allowed_.at(c);
  std::fill(mask.begin(), mask.end(), std::uint8_t{0});
  for (LinkId l : allowed) {
    if (l < 0 || l >= num_links()) throw ConfigError("graph: allowed link id out of range");
    mask[l] = 1;
  }
  rebuild_link_mask();
}

void NetworkGraph::rebuild_link_mask() {
  const std::size_t C = dest_.size();
  link_mask_.assign(links_.size() * C, 0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t l = 0; l < links_.size(); ++l) link_mask_[l * C + c] = allowed_[c][l];
  }
}

int NetworkGraph::allowed_link_count(CommodityId c) const {
  const auto& mask = allowed_.at(c);
  return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void NetworkGraph::set_positions(std::vector<GridPosition> positions) {
  if (!positions.empty() && static_cast<int>(positions.size()) != num_nodes_) {
    throw ConfigError("graph: positions must cover every node");
  }
  positions_ = std::move(positions);
}

std::optional<NodeId> NetworkGraph::node_at(int global_row, int global_col) const {
  for (NodeId n = 0; n < static_cast<NodeId>(positions_.size()); ++n) {
    if (positions_[n].global_row == global_row && positions_[n].global_col == global_col) {
      return n;
    }
  }
  return std::nullopt;
}

NetworkGraph build_clustered_grid(int clusters, int grid_side, int random_links_per_cluster,
                                  int inter_cluster_links, std::uint64_t seed) {
  if (grid_side < 2) throw ConfigError("clustered grid: grid_side must be at least 2");
  if (clusters < 1) throw ConfigError("clustered grid: need at least one cluster");
  if (random_links_per_cluster < 0 || inter_cluster_links < 0) {
    throw ConfigError("clustered grid: link counts must be non-negative");
  }
  const int arrangement = static_cast<int>(std::lround(std::sqrt(static_cast<double>(clusters))));
  if (arrangement * arrangement != clusters) {
    throw ConfigError("clustered grid: cluster count must be a perfect square");
  }
  const int g = grid_side;
  const int per_cluster = g * g;
  const int n = clusters * per_cluster;
  auto id = [&](int cluster, int row, int col) { return cluster * per_cluster + row * g + col; };

  std::vector<Link> links;
  std::set<std::pair<NodeId, NodeId>> undirected;
  auto add_bidirectional = [&](NodeId a, NodeId b) {
    links.push_back({a, b});
    links.push_back({b, a});
    undirected.insert({std::min(a, b), std::max(a, b)});
  };

  for (int k = 0; k < clusters; ++k) {
    for (int r = 0; r < g; ++r) {
      for (int c = 0; c + 1 < g; ++c) add_bidirectional(id(k, r, c), id(k, r, c + 1));
    }
    for (int r = 0; r + 1 < g; ++r) {
      for (int c = 0; c < g; ++c) add_bidirectional(id(k, r, c), id(k, r + 1, c));
    }
  }

  SplitMix64 rng(hash_key({seed, 0x746f706fULL}));

  // Random chords: uniform over absent intra-cluster pairs, without replacement.
  for (int k = 0; k < clusters; ++k) {
    std::vector<std::pair<NodeId, NodeId>> candidates;
    for (int i = 0; i < per_cluster; ++i) {
      for (int j = i + 1; j < per_cluster; ++j) {
        NodeId a = k * per_cluster + i;
        NodeId b = k * per_cluster + j;
        if (!undirected.count({a, b})) candidates.push_back({a, b});
      }
    }
    if (random_links_per_cluster > static_cast<int>(candidates.size())) {
      throw ConfigError("clustered grid: not enough absent pairs for random links");
    }
    for (int m = 0; m < random_links_per_cluster; ++m) {
      std::uniform_int_distribution<std::size_t> pick(m, candidates.size() - 1);
      std::swap(candidates[m], candidates[pick(rng)]);
      add_bidirectional(candidates[m].first, candidates[m].second);
    }
  }

  // Inter-cluster links: for each adjacent pair, choose distinct aligned
  // positions along the facing boundaries.
  if (clusters > 1 && inter_cluster_links > g) {
    throw ConfigError("clustered grid: more inter-cluster links than boundary positions");
  }
  auto connect = [&](int left_or_top, int right_or_bottom, bool horizontal) {
    std::vector<int> offsets(g);
    for (int i = 0; i < g; ++i) offsets[i] = i;
    for (int m = 0; m < inter_cluster_links; ++m) {
      std::uniform_int_distribution<int> pick(m, g - 1);
      std::swap(offsets[m], offsets[pick(rng)]);
      int o = offsets[m];
      if (horizontal) {
        add_bidirectional(id(left_or_top, o, g - 1), id(right_or_bottom, o, 0));
      } else {
        add_bidirectional(id(left_or_top, g - 1, o), id(right_or_bottom, 0, o));
      }
    }
  };
  for (int cr = 0; cr < arrangement; ++cr) {
    for (int cc = 0; cc + 1 < arrangement; ++cc) {
      connect(cr * arrangement + cc, cr * arrangement + cc + 1, true);
    }
  }
  for (int cr = 0; cr + 1 < arrangement; ++cr) {
    for (int cc = 0; cc < arrangement; ++cc) {
      connect(cr * arrangement + cc, (cr + 1) * arrangement + cc, false);
    }
  }

  NetworkGraph graph(n, std::move(links));
  std::vector<GridPosition> positions(n);
  for (int k = 0; k < clusters; ++k) {
    for (int r = 0; r < g; ++r) {
      for (int c = 0; c < g; ++c) {
        positions[id(k, r, c)] = {k, r, c, (k / arrangement) * g + r, (k % arrangement) * g + c};
      }
    }
  }
  graph.set_positions(std::move(positions));
  return graph;
}

int max_in_degree(const NetworkGraph& graph) {
  int best = 0;
  const int commodities = graph.num_commodities();
  for (NodeId n = 0; n < graph.num_nodes(); ++n) {
    auto in = graph.in_links(n);
    if (commodities == 0) {
      best = std::max(best, static_cast<int>(in.size()));
      continue;
    }
    for (CommodityId c = 0; c < commodities; ++c) {
      int d = 0;
      for (LinkId l : in) d += graph.allowed(c, l) ? 1 : 0;
      best = std::max(best, d);
    }
  }
  return best;
}

std::string graph_to_json(const NetworkGraph& graph) {
  json doc;
  doc["nodes"] = graph.num_nodes();
  json links = json::array();
  for (const Link& l : graph.links()) links.push_back({l.from, l.to});
  doc["links"] = std::move(links);
  json commodities = json::array();
  for (CommodityId c = 0; c < graph.num_commodities(); ++c) {
    json entry;
    entry["destination"] = graph.destination(c);
    if (graph.allowed_link_count(c) == graph.num_links()) {
      entry["allowed_links"] = "all";
    } else {
      json allowed = json::array();
      for (LinkId l = 0; l < graph.num_links(); ++l) {
        if (graph.allowed(c, l)) allowed.push_back(l);
      }
      entry["allowed_links"] = std::move(allowed);
    }
    commodities.push_back(std::move(entry));
  }
  doc["commodities"] = std::move(commodities);
  if (graph.has_positions()) {
    json positions = json::array();
    for (const GridPosition& p : graph.positions()) {
      positions.push_back({p.cluster, p.row, p.col, p.global_row, p.global_col});
    }
    doc["positions"] = std::move(positions);
  }
  return doc.dump(1);
}

NetworkGraph graph_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
  try {
    std::vector<Link> links;
    for (const auto& l : doc.at("links")) links.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
    NetworkGraph graph(doc.at("nodes").get<int>(), std::move(links));
    if (doc.contains("commodities")) {
      for (const auto& entry : doc["commodities"]) {
        CommodityId c = graph.add_commodity(entry.at("destination").get<int>());
        const auto& allowed = entry.value("allowed_links", json("all"));
        if (!allowed.is_string()) {
          std::vector<LinkId> ids = allowed.get<std::vector<LinkId>>();
          graph.restrict_commodity(c, ids);
        }
      }
    }
    if (doc.contains("positions")) {
      std::vector<GridPosition> positions;
      for (const auto& p : doc["positions"]) {
        positions.push_back({p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<int>(),
                             p.at(3).get<int>(), p.at(4).get<int>()});
      }
      graph.set_positions(std::move(positions));
    }
    return graph;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
}

}  // namespace bpsim
