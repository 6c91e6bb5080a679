#include "bpsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bpsim {

namespace {

using json = nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      fail(path + "." + key, "unknown field");
    }
  }
}

double number(const json& obj, const char* key, const std::string& path, std::optional<double> fallback = {}) {
  if (!obj.contains(key) || obj[key].is_null()) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required number");
  }
  const json& v = obj[key];
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  const double x = v.get<double>();
  if (std::isnan(x)) fail(path + "." + key, "must not be NaN");
  return x;
}

long integer(const json& obj, const char* key, const std::string& path, std::optional<long> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required integer");
  }
  const json& v = obj[key];
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<long>();
}

std::string text(const json& obj, const char* key, const std::string& path, std::optional<std::string> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required string");
  }
  if (!obj[key].is_string()) fail(path + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

// Infinity is written as null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

Endpoint parse_endpoint(const json& v, const std::string& path) {
  Endpoint e;
  if (v.is_number_integer()) {
    e.node = v.get<int>();
    if (e.node < 0) fail(path, "node id must be non-negative");
    return e;
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer()) {
    e.by_coordinates = true;
    e.row = v[0].get<int>();
    e.col = v[1].get<int>();
    return e;
  }
  fail(path, "expected a node id or [row, col]");
}

json endpoint_json(const Endpoint& e) { return e.by_coordinates ? json::array({e.row, e.col}) : json(e.node); }

ArrivalDistribution parse_arrival(const json& v, const std::string& path) {
  const std::string type = text(v, "type", path);
  ArrivalDistribution d;
  if (type == "poisson") {
    check_keys(v, path, {"type", "rate"});
    d = ArrivalDistribution::poisson(number(v, "rate", path));
  } else if (type == "bernoulli") {
    check_keys(v, path, {"type", "p", "batch"});
    d = ArrivalDistribution::bernoulli(number(v, "p", path), number(v, "batch", path, 1.0));
    if (d.a > 1.0) fail(path + ".p", "must be at most 1");
  } else if (type == "constant") {
    check_keys(v, path, {"type", "amount"});
    d = ArrivalDistribution::constant(number(v, "amount", path));
  } else if (type == "uniform") {
    check_keys(v, path, {"type", "low", "high"});
    d = ArrivalDistribution::uniform(number(v, "low", path), number(v, "high", path));
    if (d.b < d.a) fail(path, "high must be at least low");
  } else {
    fail(path + ".type", "unknown arrival type '" + type + "'");
  }
  if (d.a < 0.0 || d.b < 0.0 || !std::isfinite(d.a) || !std::isfinite(d.b)) {
    fail(path, "arrival parameters must be finite and non-negative");
  }
  return d;
}

json arrival_json(const ArrivalDistribution& d) {
  switch (d.kind) {
    case ArrivalDistribution::Kind::poisson: return {{"type", "poisson"}, {"rate", d.a}};
    case ArrivalDistribution::Kind::bernoulli: return {{"type", "bernoulli"}, {"p", d.a}, {"batch", d.b}};
    case ArrivalDistribution::Kind::constant: return {{"type", "constant"}, {"amount", d.a}};
    case ArrivalDistribution::Kind::uniform: return {{"type", "uniform"}, {"low", d.a}, {"high", d.b}};
  }
  return {};
}

TopologyConfig parse_topology(const json& v, const std::string& path) {
  TopologyConfig t;
  const std::string type = text(v, "type", path);
  if (type == "clustered_grid") {
    check_keys(v, path, {"type", "clusters", "grid_side", "random_links_per_cluster", "inter_cluster_links", "seed"});
    t.kind = TopologyConfig::Kind::clustered_grid;
    t.clusters = static_cast<int>(integer(v, "clusters", path, 4));
    t.grid_side = static_cast<int>(integer(v, "grid_side", path, 4));
    t.random_links_per_cluster = static_cast<int>(integer(v, "random_links_per_cluster", path, 2));
    t.inter_cluster_links = static_cast<int>(integer(v, "inter_cluster_links", path, 2));
    const long seed = integer(v, "seed", path, 3);
    if (seed < 0) fail(path + ".seed", "must be non-negative");
    t.seed = static_cast<std::uint64_t>(seed);
    if (t.clusters < 1) fail(path + ".clusters", "must be positive");
    const int root = static_cast<int>(std::lround(std::sqrt(t.clusters)));
    if (root * root != t.clusters) fail(path + ".clusters", "must be a perfect square");
    if (t.grid_side < 1) fail(path + ".grid_side", "must be positive");
    if (t.random_links_per_cluster < 0) fail(path + ".random_links_per_cluster", "must be non-negative");
    if (t.inter_cluster_links < 0 || t.inter_cluster_links > t.grid_side) {
      fail(path + ".inter_cluster_links", "must lie in [0, grid_side]");
    }
  } else if (type == "line") {
    check_keys(v, path, {"type", "nodes"});
    t.kind = TopologyConfig::Kind::line;
    t.nodes = static_cast<int>(integer(v, "nodes", path));
    if (t.nodes < 2) fail(path + ".nodes", "a line needs at least two nodes");
  } else if (type == "explicit") {
    check_keys(v, path, {"type", "nodes", "links", "bidirectional"});
    t.kind = TopologyConfig::Kind::explicit_links;
    t.nodes = static_cast<int>(integer(v, "nodes", path));
    if (t.nodes < 1) fail(path + ".nodes", "must be positive");
    if (v.contains("bidirectional")) {
      if (!v["bidirectional"].is_boolean()) fail(path + ".bidirectional", "expected a boolean");
      t.bidirectional = v["bidirectional"].get<bool>();
    }
    if (!v.contains("links") || !v["links"].is_array()) fail(path + ".links", "expected an array of [from, to]");
    for (std::size_t i = 0; i < v["links"].size(); ++i) {
      const json& l = v["links"][i];
      const std::string lp = path + ".links[" + std::to_string(i) + "]";
      if (!l.is_array() || l.size() != 2 || !l[0].is_number_integer() || !l[1].is_number_integer()) {
        fail(lp, "expected [from, to]");
      }
      const Link link{l[0].get<int>(), l[1].get<int>()};
      if (link.from < 0 || link.to < 0 || link.from >= t.nodes || link.to >= t.nodes) fail(lp, "node out of range");
      if (link.from == link.to) fail(lp, "self-loop");
      t.links.push_back(link);
    }
  } else if (type == "file") {
    check_keys(v, path, {"type", "path"});
    t.kind = TopologyConfig::Kind::file;
    t.path = text(v, "path", path);
  } else {
    fail(path + ".type", "unknown topology type '" + type + "'");
  }
  return t;
}

json topology_json(const TopologyConfig& t) {
  switch (t.kind) {
    case TopologyConfig::Kind::clustered_grid:
      return {{"type", "clustered_grid"},
              {"clusters", t.clusters},
              {"grid_side", t.grid_side},
              {"random_links_per_cluster", t.random_links_per_cluster},
              {"inter_cluster_links", t.inter_cluster_links},
              {"seed", t.seed}};
    case TopologyConfig::Kind::line: return {{"type", "line"}, {"nodes", t.nodes}};
    case TopologyConfig::Kind::explicit_links: {
      json links = json::array();
      for (const Link& l : t.links) links.push_back({l.from, l.to});
      return {{"type", "explicit"}, {"nodes", t.nodes}, {"links", links}, {"bidirectional", t.bidirectional}};
    }
    case TopologyConfig::Kind::file: return {{"type", "file"}, {"path", t.path}};
  }
  return {};
}

PolicyConfig parse_policy(const json& v, const std::string& path) {
  check_keys(v, path, {"algorithm", "z", "B"});
  PolicyConfig p;
  const std::string name = lower(text(v, "algorithm", path));
  try {
    p.algorithm = parse_algorithm(name);
  } catch (const ConfigError&) {
    fail(path + ".algorithm", "unknown algorithm '" + name + "'");
  }
  if (p.algorithm == Algorithm::custom) fail(path + ".algorithm", "custom policies cannot be loaded from a file");
  p.z = number(v, "z", path, 1.0);
  p.B = number(v, "B", path, 0.0);
  if (!(p.z > 0.0)) fail(path + ".z", "must be positive");
  if (p.B < 0.0 || !std::isfinite(p.B)) fail(path + ".B", "must be finite and non-negative");
  return p;
}

std::string policy_display(const PolicyConfig& p) { return PolicySpec::make(p.algorithm, p.z, p.B).label(); }

bool uses_z(Algorithm a) {
  return a == Algorithm::bpnxt || a == Algorithm::bpmin || a == Algorithm::bpnxtbias || a == Algorithm::bpminbias;
}
bool uses_B(Algorithm a) {
  return a == Algorithm::bpbias || a == Algorithm::bpnxtbias || a == Algorithm::bpminbias;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NodeId resolve(const Endpoint& e, const NetworkGraph& g, const std::string& path) {
  if (!e.by_coordinates) {
    if (e.node >= g.num_nodes()) fail(path, "node " + std::to_string(e.node) + " does not exist");
    return e.node;
  }
  if (!g.has_positions()) fail(path, "[row, col] endpoints need a grid topology");
  const auto n = g.node_at(e.row, e.col);
  if (!n) fail(path, "no node at [" + std::to_string(e.row) + ", " + std::to_string(e.col) + "]");
  return *n;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss << std::setprecision(12) << x;
  return ss.str();
}

}  // namespace

Scenario scenario_from_json(const std::string& input) {
  json doc;
  try {
    doc = json::parse(input);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  const std::string root = "scenario";
  check_keys(doc, root,
             {"id", "topology", "link_rate", "commodities", "policies", "flow_control", "engine", "sweep", "margin",
              "outputs"});
  Scenario s;
  s.id = text(doc, "id", root, std::string("scenario"));
  if (!doc.contains("topology")) fail(root + ".topology", "missing required object");
  s.topology = parse_topology(doc["topology"], root + ".topology");
  s.link_rate = number(doc, "link_rate", root, 1.0);
  if (!(s.link_rate > 0.0) || !std::isfinite(s.link_rate)) fail(root + ".link_rate", "must be positive and finite");

  if (!doc.contains("commodities") || !doc["commodities"].is_array() || doc["commodities"].empty()) {
    fail(root + ".commodities", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < doc["commodities"].size(); ++i) {
    const std::string p = root + ".commodities[" + std::to_string(i) + "]";
    const json& c = doc["commodities"][i];
    check_keys(c, p, {"source", "destination", "arrival"});
    if (!c.contains("source")) fail(p + ".source", "missing");
    if (!c.contains("destination")) fail(p + ".destination", "missing");
    if (!c.contains("arrival")) fail(p + ".arrival", "missing");
    CommodityConfig cc;
    cc.source = parse_endpoint(c["source"], p + ".source");
    cc.destination = parse_endpoint(c["destination"], p + ".destination");
    cc.arrival = parse_arrival(c["arrival"], p + ".arrival");
    if (cc.source == cc.destination) fail(p, "source equals destination");
    s.commodities.push_back(cc);
  }

  if (doc.contains("policies")) {
    if (!doc["policies"].is_array() || doc["policies"].empty()) fail(root + ".policies", "expected a non-empty array");
    for (std::size_t i = 0; i < doc["policies"].size(); ++i) {
      s.policies.push_back(parse_policy(doc["policies"][i], root + ".policies[" + std::to_string(i) + "]"));
    }
  } else {
    s.policies.push_back({});
  }

  if (doc.contains("flow_control") && !doc["flow_control"].is_null()) {
    const std::string p = root + ".flow_control";
    const json& f = doc["flow_control"];
    check_keys(f, p, {"M", "r_max", "utility", "weight", "transport_cap"});
    FlowControlConfig fc;
    fc.M = number(f, "M", p, 1.0);
    fc.r_max = number(f, "r_max", p, 1.0);
    fc.weight = number(f, "weight", p, 1.0);
    fc.transport_cap = number(f, "transport_cap", p, kInf);
    const std::string u = text(f, "utility", p, std::string("log"));
    if (u == "log") {
      fc.utility = UtilitySpec::Kind::log;
    } else if (u == "linear") {
      fc.utility = UtilitySpec::Kind::linear;
    } else {
      fail(p + ".utility", "expected 'log' or 'linear'");
    }
    if (!(fc.M > 0.0) || !std::isfinite(fc.M)) fail(p + ".M", "must be positive and finite");
    if (fc.r_max < 0.0 || !std::isfinite(fc.r_max)) fail(p + ".r_max", "must be finite and non-negative");
    if (!(fc.weight > 0.0)) fail(p + ".weight", "must be positive");
    if (!(fc.transport_cap >= 0.0)) fail(p + ".transport_cap", "must be non-negative");
    s.flow_control = fc;
  }

  if (doc.contains("engine")) {
    const std::string p = root + ".engine";
    const json& e = doc["engine"];
    check_keys(e, p, {"slots", "warmup", "seed", "slot_duration"});
    s.engine.slots = integer(e, "slots", p, 100000);
    s.engine.warmup = integer(e, "warmup", p, -1);
    const long seed = integer(e, "seed", p, 1);
    if (seed < 0) fail(p + ".seed", "must be non-negative");
    s.engine.seed = static_cast<std::uint64_t>(seed);
    s.engine.slot_duration = number(e, "slot_duration", p, 1.0);
    if (s.engine.slots < 1) fail(p + ".slots", "must be positive");
    if (s.engine.warmup >= s.engine.slots) fail(p + ".warmup", "must be smaller than slots");
    if (!(s.engine.slot_duration > 0.0)) fail(p + ".slot_duration", "must be positive");
  }

  if (doc.contains("sweep") && !doc["sweep"].is_null()) {
    const std::string p = root + ".sweep";
    const json& w = doc["sweep"];
    check_keys(w, p, {"parameter", "values", "replications"});
    SweepConfig sc;
    try {
      sc.parameter = parse_parameter(text(w, "parameter", p));
    } catch (const ConfigError& e) {
      fail(p + ".parameter", e.what());
    }
    if (!w.contains("values") || !w["values"].is_array() || w["values"].empty()) {
      fail(p + ".values", "expected a non-empty array of numbers");
    }
    for (std::size_t i = 0; i < w["values"].size(); ++i) {
      const json& x = w["values"][i];
      if (!x.is_number()) fail(p + ".values[" + std::to_string(i) + "]", "expected a number");
      sc.values.push_back(x.get<double>());
    }
    sc.replications = static_cast<int>(integer(w, "replications", p, 1));
    if (sc.replications < 1) fail(p + ".replications", "must be positive");
    if (sc.parameter == SweepParameter::M && !s.flow_control) fail(p + ".parameter", "an M sweep needs flow_control");
    s.sweep = sc;
  }

  if (doc.contains("margin")) {
    const std::string p = root + ".margin";
    const json& m = doc["margin"];
    check_keys(m, p, {"z", "lambda"});
    if (m.contains("z") && !m["z"].is_null()) s.margin.z = number(m, "z", p);
    if (m.contains("lambda")) s.margin.lambda = number(m, "lambda", p);
  }

  if (doc.contains("outputs")) {
    const std::string p = root + ".outputs";
    const json& o = doc["outputs"];
    check_keys(o, p, {"csv", "plot"});
    s.csv = text(o, "csv", p, std::string());
    s.plot = text(o, "plot", p, std::string());
  }
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json doc;
  doc["id"] = s.id;
  doc["topology"] = topology_json(s.topology);
  doc["link_rate"] = s.link_rate;
  json commodities = json::array();
  for (const CommodityConfig& c : s.commodities) {
    commodities.push_back({{"source", endpoint_json(c.source)},
                           {"destination", endpoint_json(c.destination)},
                           {"arrival", arrival_json(c.arrival)}});
  }
  doc["commodities"] = commodities;
  json policies = json::array();
  for (const PolicyConfig& p : s.policies) {
    policies.push_back({{"algorithm", algorithm_name(p.algorithm)}, {"z", finite_or_null(p.z)}, {"B", p.B}});
  }
  doc["policies"] = policies;
  if (s.flow_control) {
    const FlowControlConfig& f = *s.flow_control;
    doc["flow_control"] = {{"M", f.M},
                           {"r_max", f.r_max},
                           {"utility", f.utility == UtilitySpec::Kind::linear ? "linear" : "log"},
                           {"weight", f.weight},
                           {"transport_cap", finite_or_null(f.transport_cap)}};
  }
  doc["engine"] = {{"slots", s.engine.slots},
                   {"warmup", s.engine.warmup},
                   {"seed", s.engine.seed},
                   {"slot_duration", s.engine.slot_duration}};
  if (s.sweep) {
    doc["sweep"] = {{"parameter", parameter_name(s.sweep->parameter)},
                    {"values", s.sweep->values},
                    {"replications", s.sweep->replications}};
  }
  json margin = json::object();
  if (s.margin.z) margin["z"] = finite_or_null(*s.margin.z);
  if (s.margin.lambda) margin["lambda"] = *s.margin.lambda;
  if (!margin.empty()) doc["margin"] = margin;
  if (!s.csv.empty() || !s.plot.empty()) doc["outputs"] = {{"csv", s.csv}, {"plot", s.plot}};
  return doc.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  const std::string text = read_file(path);
  Scenario s;
  try {
    s = scenario_from_json(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  s.base_dir = std::filesystem::path(path).parent_path().string();
  return s;
}

BuiltScenario build_scenario(const Scenario& s) {
  auto g = std::make_shared<NetworkGraph>();
  const TopologyConfig& t = s.topology;
  switch (t.kind) {
    case TopologyConfig::Kind::clustered_grid:
      *g = build_clustered_grid(t.clusters, t.grid_side, t.random_links_per_cluster, t.inter_cluster_links, t.seed);
      break;
    case TopologyConfig::Kind::line: {
      std::vector<Link> links;
      for (int i = 0; i + 1 < t.nodes; ++i) links.push_back({i, i + 1});
      *g = NetworkGraph(t.nodes, std::move(links));
      break;
    }
    case TopologyConfig::Kind::explicit_links: {
      std::vector<Link> links = t.links;
      if (t.bidirectional) {
        for (const Link& l : t.links) links.push_back({l.to, l.from});
      }
      std::set<std::pair<int, int>> seen;
      for (const Link& l : links) {
        if (!seen.insert({l.from, l.to}).second) {
          fail("scenario.topology.links", "duplicate link " + std::to_string(l.from) + "->" + std::to_string(l.to));
        }
      }
      *g = NetworkGraph(t.nodes, std::move(links));
      break;
    }
    case TopologyConfig::Kind::file: {
      const std::filesystem::path p = std::filesystem::path(s.base_dir) / t.path;
      *g = graph_from_json(read_file(p.string()));
      break;
    }
  }

  BuiltScenario b;
  std::vector<ArrivalEntry> entries;
  const bool fresh = g->num_commodities() == 0;
  for (std::size_t i = 0; i < s.commodities.size(); ++i) {
    const std::string p = "scenario.commodities[" + std::to_string(i) + "]";
    const CommodityConfig& c = s.commodities[i];
    const NodeId src = resolve(c.source, *g, p + ".source");
    const NodeId dst = resolve(c.destination, *g, p + ".destination");
    if (src == dst) fail(p, "source equals destination");
    CommodityId id = static_cast<CommodityId>(i);
    if (fresh) {
      id = g->add_commodity(dst);
    } else if (id >= g->num_commodities() || g->destination(id) != dst) {
      fail(p, "does not match the commodities of the topology file");
    }
    entries.push_back({src, id, c.arrival});
    b.sources.push_back(src);
  }
  if (!fresh && g->num_commodities() != static_cast<int>(s.commodities.size())) {
    fail("scenario.commodities", "count differs from the topology file");
  }
  b.graph = g;
  b.rates = std::make_shared<RateModel>(wireline_rate_model(*g, s.link_rate));
  b.arrivals = ArrivalSpec(*g, std::move(entries));
  return b;
}

PolicySpec make_policy(const Scenario& s, const PolicyConfig& p, const BuiltScenario& b) {
  PolicySpec spec = PolicySpec::make(p.algorithm, p.z, p.B);
  if (s.flow_control) {
    const int N = b.graph->num_nodes();
    const int C = b.graph->num_commodities();
    FlowControlSpec fc;
    fc.M = s.flow_control->M;
    fc.r_max = Matrix(N, C);
    fc.utilities.assign(static_cast<std::size_t>(N) * C, UtilitySpec::none());
    for (CommodityId c = 0; c < C; ++c) {
      const NodeId n = b.sources[c];
      fc.r_max(n, c) = s.flow_control->r_max;
      fc.utilities[static_cast<std::size_t>(n) * C + c] = {s.flow_control->utility, s.flow_control->weight};
    }
    spec.flow_control = fc;
  }
  return spec;
}

RunConfig make_run_config(const Scenario& s) {
  RunConfig rc;
  rc.slots = s.engine.slots;
  rc.warmup = s.engine.warmup;
  rc.seed = s.engine.seed;
  rc.slot_duration = s.engine.slot_duration;
  return rc;
}

Experiment make_experiment(const Scenario& s, const PolicyConfig& p, const BuiltScenario& b) {
  Experiment e{b.graph, b.rates, b.arrivals, make_policy(s, p, b), make_run_config(s)};
  if (s.flow_control && std::isfinite(s.flow_control->transport_cap)) {
    e.config.transport_cap = Matrix(b.graph->num_nodes(), b.graph->num_commodities(), s.flow_control->transport_cap);
  }
  return e;
}

std::vector<ResultRow> run_scenario(const Scenario& s, int jobs) {
  const BuiltScenario b = build_scenario(s);
  const SweepParameter param = s.sweep ? s.sweep->parameter : SweepParameter::lambda;
  const int reps = s.sweep ? s.sweep->replications : 1;

  struct Cell {
    std::size_t policy;
    double value;
    int rep;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < s.policies.size(); ++p) {
    if (s.sweep) {
      for (double v : s.sweep->values) {
        for (int r = 0; r < reps; ++r) cells.push_back({p, v, r});
      }
    } else {
      cells.push_back({p, std::numeric_limits<double>::quiet_NaN(), 0});
    }
  }

  std::vector<ResultRow> rows(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    const Cell& cell = cells[i];
    Experiment e = make_experiment(s, s.policies[cell.policy], b);
    PolicyConfig pc = s.policies[cell.policy];
    std::uint64_t seed = s.engine.seed;
    if (s.sweep) {
      e = with_parameter(e, param, cell.value);
      seed = sweep_seed(s.engine.seed, cell.value, cell.rep);
      e.config.seed = seed;
      if (param == SweepParameter::z) pc.z = cell.value;
      if (param == SweepParameter::B) pc.B = cell.value;
    }
    ResultRow& row = rows[i];
    row.scenario = s.id;
    row.policy = policy_display(pc);
    row.policy_config = pc;
    row.value = cell.value;
    row.replication = cell.rep;
    row.seed = seed;
    const Matrix lam = mean_rates(e.arrivals);
    double total = 0.0;
    for (const ArrivalEntry& a : e.arrivals.entries()) total += lam(a.node, a.commodity);
    row.lambda = e.arrivals.entries().empty() ? 0.0 : total / static_cast<double>(e.arrivals.entries().size());
    row.M = e.policy.flow_control ? e.policy.flow_control->M : std::numeric_limits<double>::quiet_NaN();
    row.metrics = run(*e.graph, *e.rates, e.arrivals, e.policy, e.config);
  });
  return rows;
}

std::string csv_header(int commodities) {
  std::string h = "scenario_id,policy,lambda,z,B,M,seed,replication,slots,avg_total_backlog";
  for (int c = 0; c < commodities; ++c) h += ",backlog_c" + std::to_string(c);
  for (int c = 0; c < commodities; ++c) h += ",rbar_c" + std::to_string(c);
  h += ",utility_at_rbar,utility_at_gammabar,delay,runtime_ms";
  return h;
}

std::string csv_row(const ResultRow& row) {
  const RunMetrics& m = row.metrics;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Algorithm a = row.policy_config.algorithm;
  std::ostringstream out;
  out << row.scenario << ',' << '"' << row.policy << '"' << ',' << fmt(row.lambda) << ','
      << fmt(uses_z(a) ? row.policy_config.z : nan) << ',' << fmt(uses_B(a) ? row.policy_config.B : nan) << ','
      << fmt(row.M) << ',' << row.seed << ',' << row.replication << ',' << m.slots << ','
      << fmt(m.avg_total_backlog);
  const std::size_t C = m.per_commodity_backlog.size();
  for (double x : m.per_commodity_backlog) out << ',' << fmt(x);
  for (std::size_t c = 0; c < C; ++c) {
    double r = nan;
    if (m.flow_control) {
      r = 0.0;
      for (std::size_t n = 0; n < m.avg_admitted_rate.rows(); ++n) r += m.avg_admitted_rate(n, c);
    }
    out << ',' << fmt(r);
  }
  out << ',' << fmt(m.flow_control ? m.utility_at_rbar : nan) << ','
      << fmt(m.flow_control ? m.utility_at_gammabar : nan) << ',' << fmt(littles_law_delay(m).aggregate) << ','
      << fmt(m.runtime_ms);
  return out.str();
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  const int C = rows.empty() ? 0 : static_cast<int>(rows.front().metrics.per_commodity_backlog.size());
  std::string out = csv_header(C) + "\n";
  for (const ResultRow& r : rows) out += csv_row(r) + "\n";
  return out;
}

MdpSpec mdp_from_json(const std::string& input) {
  json doc;
  try {
    doc = json::parse(input);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("mdp: ") + e.what());
  }
  const std::string root = "mdp";
  check_keys(doc, root, {"id", "topology", "destination", "queue_cap", "arrivals", "link_rate"});
  if (!doc.contains("topology")) fail(root + ".topology", "missing required object");
  const TopologyConfig t = parse_topology(doc["topology"], root + ".topology");
  if (t.kind != TopologyConfig::Kind::explicit_links && t.kind != TopologyConfig::Kind::line) {
    fail(root + ".topology.type", "expected 'explicit' or 'line'");
  }
  std::vector<Link> links = t.links;
  if (t.kind == TopologyConfig::Kind::line) {
    for (int i = 0; i + 1 < t.nodes; ++i) links.push_back({i, i + 1});
  } else if (t.bidirectional) {
    for (const Link& l : t.links) links.push_back({l.to, l.from});
  }
  auto g = std::make_shared<NetworkGraph>(t.nodes, std::move(links));
  const long dest = integer(doc, "destination", root, t.nodes - 1);
  if (dest < 0 || dest >= t.nodes) fail(root + ".destination", "node out of range");
  g->add_commodity(static_cast<NodeId>(dest));
  const double rate = number(doc, "link_rate", root, 1.0);
  if (rate != std::floor(rate) || rate < 1.0) fail(root + ".link_rate", "must be a positive integer");
  const long cap = integer(doc, "queue_cap", root);
  if (cap < 1) fail(root + ".queue_cap", "must be positive");

  std::vector<ArrivalPmf> arrivals;
  if (!doc.contains("arrivals") || !doc["arrivals"].is_array()) fail(root + ".arrivals", "expected an array");
  for (std::size_t i = 0; i < doc["arrivals"].size(); ++i) {
    const std::string p = root + ".arrivals[" + std::to_string(i) + "]";
    const json& a = doc["arrivals"][i];
    check_keys(a, p, {"node", "pmf"});
    ArrivalPmf pmf;
    pmf.node = static_cast<NodeId>(integer(a, "node", p));
    if (pmf.node < 0 || pmf.node >= t.nodes) fail(p + ".node", "node out of range");
    if (!a.contains("pmf") || !a["pmf"].is_array() || a["pmf"].empty()) fail(p + ".pmf", "expected an array");
    double total = 0.0;
    for (const json& x : a["pmf"]) {
      if (!x.is_number() || x.get<double>() < 0.0) fail(p + ".pmf", "entries must be non-negative numbers");
      pmf.pmf.push_back(x.get<double>());
      total += pmf.pmf.back();
    }
    if (std::abs(total - 1.0) > 1e-9) fail(p + ".pmf", "must sum to 1");
    arrivals.push_back(std::move(pmf));
  }
  auto r = std::make_shared<RateModel>(wireline_rate_model(*g, rate));
  return MdpSpec(g, r, static_cast<int>(cap), std::move(arrivals));
}

}  // namespace bpsim
