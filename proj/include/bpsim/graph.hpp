#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpsim/matrix.hpp"

namespace bpsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Link {
  NodeId from = 0;
  NodeId to = 0;
  friend bool operator==(const Link&, const Link&) = default;
};

// Cluster-local grid coordinates plus the cluster's own position in the
// square arrangement of clusters.
struct GridPosition {
  int cluster = 0;
  int row = 0;
  int col = 0;
  int global_row = 0;
  int global_col = 0;
  friend bool operator==(const GridPosition&, const GridPosition&) = default;
};

// Directed multi-commodity graph. Links are immutable after construction;
// commodities (destination + allowed link set) may be added afterwards.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  NetworkGraph(int num_nodes, std::vector<Link> links);

  int num_nodes() const { return num_nodes_; }
  int num_links() const { return static_cast<int>(links_.size()); }
  int num_commodities() const { return static_cast<int>(dest_.size()); }

  const Link& link(LinkId l) const { return links_[l]; }
  std::span<const Link> links() const { return links_; }
  std::span<const LinkId> out_links(NodeId n) const { return out_[n]; }
  std::span<const LinkId> in_links(NodeId n) const { return in_[n]; }
  std::optional<LinkId> find_link(NodeId from, NodeId to) const;

  // Adds a commodity allowed on every link. Returns its id.
  CommodityId add_commodity(NodeId destination);
  // Restricts commodity c to the given subset of links.
  void restrict_commodity(CommodityId c, std::span<const LinkId> allowed);

  NodeId destination(CommodityId c) const { return dest_[c]; }
  bool allowed(CommodityId c, LinkId l) const { return allowed_[c][l] != 0; }
  // Link-major view: allowed_row(l)[c] != 0 iff l is in L^(c).
  const std::uint8_t* allowed_row(LinkId l) const {
    return link_mask_.data() + static_cast<std::size_t>(l) * dest_.size();
  }
  int allowed_link_count(CommodityId c) const;

  void set_positions(std::vector<GridPosition> positions);
  const std::vector<GridPosition>& positions() const { return positions_; }
  bool has_positions() const { return !positions_.empty(); }
  // Node at global grid coordinates, for grid topologies.
  std::optional<NodeId> node_at(int global_row, int global_col) const;

  friend bool operator==(const NetworkGraph& a, const NetworkGraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.links_ == b.links_ && a.dest_ == b.dest_ &&
           a.allowed_ == b.allowed_ && a.positions_ == b.positions_;
  }

 private:
  int num_nodes_ = 0;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
  std::vector<NodeId> dest_;
  std::vector<std::vector<std::uint8_t>> allowed_;
  std::vector<GridPosition> positions_;
  std::vector<std::uint8_t> link_mask_;

  void rebuild_link_mask();
};

// Clusters of grid_side x grid_side bidirectional grids arranged on a square,
// with random intra-cluster chords and links between adjacent clusters.
// Node id = cluster * side^2 + row * side + col; clusters are numbered
// row-major over the square arrangement.
NetworkGraph build_clustered_grid(int clusters, int grid_side, int random_links_per_cluster,
                                  int inter_cluster_links, std::uint64_t seed);

// Largest in-degree over nodes and commodities, counted within L^(c). With
// no commodities the full link set is used.
int max_in_degree(const NetworkGraph& graph);

// Structured-text (JSON) round trip.
std::string graph_to_json(const NetworkGraph& graph);
NetworkGraph graph_from_json(const std::string& text);

}  // namespace bpsim
