#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bpsim/engine.hpp"
#include "bpsim/graph.hpp"
#include "bpsim/mdp.hpp"
#include "bpsim/policy.hpp"
#include "bpsim/rate_model.hpp"
#include "bpsim/sweep.hpp"
#include "bpsim/traffic.hpp"

namespace bpsim {

// A node given either by id or by global grid coordinates (row, col).
struct Endpoint {
  bool by_coordinates = false;
  int node = 0;
  int row = 0;
  int col = 0;
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct TopologyConfig {
  enum class Kind { clustered_grid, line, explicit_links, file };
  Kind kind = Kind::clustered_grid;
  int clusters = 4;
  int grid_side = 4;
  int random_links_per_cluster = 2;
  int inter_cluster_links = 2;
  std::uint64_t seed = 3;
  int nodes = 0;                 // line: number of nodes; explicit: node count
  std::vector<Link> links;       // explicit
  bool bidirectional = false;    // explicit: add the reverse of every link
  std::string path;              // file: graph JSON, relative to the scenario file
  friend bool operator==(const TopologyConfig&, const TopologyConfig&) = default;
};

struct CommodityConfig {
  Endpoint source;
  Endpoint destination;
  ArrivalDistribution arrival;
  friend bool operator==(const CommodityConfig& a, const CommodityConfig& b) {
    return a.source == b.source && a.destination == b.destination && a.arrival.kind == b.arrival.kind &&
           a.arrival.a == b.arrival.a && a.arrival.b == b.arrival.b;
  }
};

struct PolicyConfig {
  Algorithm algorithm = Algorithm::bp;
  double z = 1.0;
  double B = 0.0;
  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

struct FlowControlConfig {
  double M = 1.0;
  double r_max = 1.0;                      // at each commodity's source; 0 elsewhere
  UtilitySpec::Kind utility = UtilitySpec::Kind::log;
  double weight = 1.0;
  double transport_cap = std::numeric_limits<double>::infinity();
  friend bool operator==(const FlowControlConfig&, const FlowControlConfig&) = default;
};

struct SweepConfig {
  SweepParameter parameter = SweepParameter::lambda;
  std::vector<double> values;
  int replications = 1;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct EngineConfig {
  long slots = 100000;
  long warmup = -1;
  std::uint64_t seed = 1;
  double slot_duration = 1.0;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct MarginConfig {
  std::optional<double> z;        // defaults to the first policy's z
  std::optional<double> lambda;   // overrides every commodity's mean rate
  friend bool operator==(const MarginConfig&, const MarginConfig&) = default;
};

struct Scenario {
  std::string id = "scenario";
  TopologyConfig topology;
  double link_rate = 1.0;
  std::vector<CommodityConfig> commodities;
  std::vector<PolicyConfig> policies;
  std::optional<FlowControlConfig> flow_control;
  EngineConfig engine;
  std::optional<SweepConfig> sweep;
  MarginConfig margin;
  std::string csv;   // output file names, relative to the output directory
  std::string plot;
  std::string base_dir;  // directory of the scenario file; not serialized
  friend bool operator==(const Scenario& a, const Scenario& b) {
    return a.id == b.id && a.topology == b.topology && a.link_rate == b.link_rate &&
           a.commodities == b.commodities && a.policies == b.policies && a.flow_control == b.flow_control &&
           a.engine == b.engine && a.sweep == b.sweep && a.margin == b.margin && a.csv == b.csv &&
           a.plot == b.plot;
  }
};

// Parsing reports ConfigError messages prefixed with the field path.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::string& path);

struct BuiltScenario {
  std::shared_ptr<const NetworkGraph> graph;
  std::shared_ptr<const RateModel> rates;
  ArrivalSpec arrivals;
  std::vector<NodeId> sources;
};
BuiltScenario build_scenario(const Scenario& scenario);

PolicySpec make_policy(const Scenario& scenario, const PolicyConfig& policy, const BuiltScenario& built);
RunConfig make_run_config(const Scenario& scenario);
Experiment make_experiment(const Scenario& scenario, const PolicyConfig& policy, const BuiltScenario& built);

struct ResultRow {
  std::string scenario;
  std::string policy;
  PolicyConfig policy_config;
  double lambda = 0.0;
  double M = 0.0;  // NaN without flow control
  double value = 0.0;
  int replication = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

// Every policy over the sweep grid (or once, without a sweep). Rows are
// ordered by policy, then value, then replication.
std::vector<ResultRow> run_scenario(const Scenario& scenario, int jobs = 1);

std::string csv_header(int commodities);
std::string csv_row(const ResultRow& row);
std::string results_csv(const std::vector<ResultRow>& rows);

// DP-oracle instance: {"topology": ..., "queue_cap": k, "arrivals": [{"node", "pmf"}], "destination"}.
MdpSpec mdp_from_json(const std::string& text);

}  // namespace bpsim
