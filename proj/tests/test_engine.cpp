#include <cmath>
#include <cstring>
#include <deque>
#include <memory>

#include "bpsim/engine.hpp"
#include "bpsim/sweep.hpp"
#include "doctest.h"

using namespace bpsim;

namespace {

NetworkGraph line(int nodes) {
  std::vector<Link> links;
  for (int n = 0; n + 1 < nodes; ++n) links.push_back({n, n + 1});
  NetworkGraph g(nodes, links);
  g.add_commodity(nodes - 1);
  return g;
}

struct DefaultSetup {
  std::shared_ptr<NetworkGraph> graph;
  std::shared_ptr<RateModel> rates;
  ArrivalSpec arrivals;
};

DefaultSetup default_setup(double lambda) {
  DefaultSetup s;
  s.graph = std::make_shared<NetworkGraph>(build_clustered_grid(4, 4, 2, 2, 3));
  const int pairs[8][4] = {{1, 3, 2, 5}, {2, 3, 2, 7}, {2, 2, 1, 6}, {3, 4, 2, 7},
                           {1, 1, 1, 7}, {4, 3, 5, 4}, {4, 6, 6, 6}, {5, 3, 5, 6}};
  std::vector<ArrivalEntry> entries;
  for (const auto& p : pairs) {
    const CommodityId c = s.graph->add_commodity(*s.graph->node_at(p[2], p[3]));
    entries.push_back({*s.graph->node_at(p[0], p[1]), c, ArrivalDistribution::poisson(lambda)});
  }
  s.rates = std::make_shared<RateModel>(wireline_rate_model(*s.graph, 1.0));
  s.arrivals = ArrivalSpec(*s.graph, entries);
  return s;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("zero arrivals leave the network empty") {
  NetworkGraph g = line(3);
  const ArrivalSpec arr(g, {});
  const RunMetrics m = run(g, wireline_rate_model(g, 1.0), arr, PolicySpec::make(Algorithm::bpmin, 1.0),
                           RunConfig{.slots = 500});
  CHECK(m.avg_total_backlog == 0.0);
  CHECK(m.delivered[0] == 0.0);
  CHECK(littles_law_delay(m).aggregate == 0.0);
}

TEST_CASE("single link with constant arrivals delivers the offered rate") {
  NetworkGraph g = line(2);
  const ArrivalSpec arr(g, {{0, 0, ArrivalDistribution::constant(0.5)}});
  const RunMetrics m = run(g, wireline_rate_model(g, 1.0), arr, PolicySpec::make(Algorithm::bp),
                           RunConfig{.slots = 10000, .warmup = 0});
  CHECK(m.delivered_rate[0] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(m.avg_total_backlog == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(m.conservation_error() == 0.0);
}

TEST_CASE("Little's law delay matches FIFO bit timestamps") {
  NetworkGraph g = line(4);
  const ArrivalSpec arr(g, {{0, 0, ArrivalDistribution::uniform(0.0, 0.9)}});
  const long T = 40000;
  RunConfig cfg{.slots = T, .warmup = 0, .seed = 9};
  cfg.series_stride = 1;
  const RunMetrics m = run(g, wireline_rate_model(g, 1.0), arr, PolicySpec::make(Algorithm::bp), cfg);
  REQUIRE(m.backlog_series.size() == static_cast<std::size_t>(T));

  // Departures per slot follow from arrivals and the backlog change; bits
  // leave in arrival order.
  std::deque<std::pair<long, double>> waiting;
  double prev = 0.0, weighted = 0.0, moved = 0.0;
  for (long t = 0; t < T; ++t) {
    const double a = sample_arrivals(arr, cfg.seed, t)(0, 0);
    if (a > 0.0) waiting.emplace_back(t, a);
    double out = prev + a - m.backlog_series[t];
    prev = m.backlog_series[t];
    while (out > 1e-12 && !waiting.empty()) {
      const double take = std::min(out, waiting.front().second);
      weighted += take * static_cast<double>(t - waiting.front().first);
      moved += take;
      out -= take;
      waiting.front().second -= take;
      if (waiting.front().second <= 1e-12) waiting.pop_front();
    }
  }
  const double fifo = weighted / moved;
  const double little = littles_law_delay(m).aggregate;
  CHECK(std::abs(little - fifo) <= 0.05 * fifo);
}

TEST_CASE("property: seed determinism gives bit-identical reruns and exact integer conservation") {
  const DefaultSetup s = default_setup(0.4);
  const PolicySpec pol = PolicySpec::make(Algorithm::bpmin, 1.0);
  const RunConfig cfg{.slots = 3000, .seed = 17};
  const RunMetrics a = run(*s.graph, *s.rates, s.arrivals, pol, cfg);
  const RunMetrics b = run(*s.graph, *s.rates, s.arrivals, pol, cfg);
  CHECK(bit_equal(a.avg_total_backlog, b.avg_total_backlog));
  CHECK(bit_equal(a.trailing_avg_backlog, b.trailing_avg_backlog));
  for (std::size_t c = 0; c < a.delivered.size(); ++c) {
    CHECK(bit_equal(a.delivered[c], b.delivered[c]));
    CHECK(bit_equal(a.per_commodity_backlog[c], b.per_commodity_backlog[c]));
  }
  CHECK(a.conservation_error() == 0.0);
  RunConfig other = cfg;
  other.seed = 18;
  CHECK_FALSE(bit_equal(run(*s.graph, *s.rates, s.arrivals, pol, other).avg_total_backlog, a.avg_total_backlog));
}

TEST_CASE("next-hop bias lowers backlog against plain backpressure") {
  const DefaultSetup s = default_setup(0.4);
  const RunConfig cfg{.slots = 20000, .seed = 3};
  const double bp = run(*s.graph, *s.rates, s.arrivals, PolicySpec::make(Algorithm::bp), cfg).avg_total_backlog;
  const double nxt =
      run(*s.graph, *s.rates, s.arrivals, PolicySpec::make(Algorithm::bpnxt, 1.0), cfg).avg_total_backlog;
  CHECK(nxt < bp);
}

TEST_CASE("sweep rows are ordered and independent of the thread count") {
  const DefaultSetup s = default_setup(0.2);
  Experiment e{s.graph, s.rates, s.arrivals, PolicySpec::make(Algorithm::bpnxt, 2.0), RunConfig{.slots = 800}};
  const std::vector<double> values{0.3, 0.1};
  const auto one = sweep(e, SweepParameter::lambda, values, 2, 1);
  const auto many = sweep(e, SweepParameter::lambda, values, 2, 3);
  REQUIRE(one.size() == 4);
  REQUIRE(many.size() == 4);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].value == values[i / 2]);
    CHECK(one[i].replication == static_cast<int>(i % 2));
    CHECK(one[i].seed == sweep_seed(e.config.seed, one[i].value, one[i].replication));
    CHECK(bit_equal(one[i].metrics.avg_total_backlog, many[i].metrics.avg_total_backlog));
  }
  CHECK(one[0].seed != one[1].seed);
  CHECK(sweep(e, SweepParameter::lambda, {}, 2).empty());
  CHECK_THROWS_AS(sweep(e, SweepParameter::lambda, values, 0), ConfigError);
}

TEST_CASE("parameter overrides") {
  const DefaultSetup s = default_setup(0.2);
  Experiment e{s.graph, s.rates, s.arrivals, PolicySpec::make(Algorithm::bpminbias, 1.0, 1.0), RunConfig{}};
  const Experiment lam = with_parameter(e, SweepParameter::lambda, 0.55);
  for (const auto& entry : lam.arrivals.entries()) CHECK(entry.distribution.mean() == doctest::Approx(0.55));
  const Experiment z = with_parameter(e, SweepParameter::z, 5.0);
  CHECK(z.policy.z == 5.0);
  CHECK(z.policy.per_link_cost == 1.0);
  CHECK(z.policy.algorithm == Algorithm::bpminbias);
  const Experiment b = with_parameter(e, SweepParameter::B, 10.0);
  CHECK(b.policy.per_link_cost == 10.0);
  CHECK(parse_parameter(parameter_name(SweepParameter::M)) == SweepParameter::M);
}

TEST_CASE("flow control admits close to the utility-optimal rate on one link") {
  NetworkGraph g = line(2);
  const ArrivalSpec arr(g, {{0, 0, ArrivalDistribution::poisson(3.0)}});
  PolicySpec pol = PolicySpec::make(Algorithm::bp);
  FlowControlSpec fc;
  fc.M = 50.0;
  fc.r_max = Matrix(2, 1);
  fc.r_max(0, 0) = 1.0;
  fc.utilities = {UtilitySpec::log(), UtilitySpec::none()};
  pol.flow_control = fc;
  const RunMetrics m = run(g, wireline_rate_model(g, 1.0), arr, pol, RunConfig{.slots = 50000});
  CHECK(m.flow_control);
  CHECK(m.avg_admitted_rate(0, 0) <= 1.0 + 1e-12);
  CHECK(m.avg_admitted_rate(0, 0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m.delivered_rate[0] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("engine rejects inconsistent configurations") {
  NetworkGraph g = line(2);
  const ArrivalSpec arr(g, {});
  const RateModel r = wireline_rate_model(g, 1.0);
  CHECK_THROWS_AS(run(g, r, arr, PolicySpec::make(Algorithm::bp), RunConfig{.slots = 10, .warmup = 10}), ConfigError);
  RunConfig bad{.slots = 10};
  bad.initial_backlog = Matrix(2, 1, -1.0);
  CHECK_THROWS_AS(run(g, r, arr, PolicySpec::make(Algorithm::bp), bad), ConfigError);
}
