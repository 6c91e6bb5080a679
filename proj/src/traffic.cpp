#include "bpsim/traffic.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>

#include "bpsim/rng.hpp"

namespace bpsim {

double ArrivalDistribution::mean() const {
  switch (kind) {
    case Kind::poisson: return a;
    case Kind::bernoulli: return a * b;
    case Kind::constant: return a;
    case Kind::uniform: return 0.5 * (a + b);
  }
  return 0.0;
}

double ArrivalDistribution::max() const {
  switch (kind) {
    case Kind::poisson: return a > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    case Kind::bernoulli: return a > 0.0 ? b : 0.0;
    case Kind::constant: return a;
    case Kind::uniform: return b;
  }
  return 0.0;
}

namespace {

void validate(const ArrivalDistribution& d) {
  using K = ArrivalDistribution::Kind;
  bool ok = std::isfinite(d.a) && std::isfinite(d.b);
  switch (d.kind) {
    case K::poisson: ok = ok && d.a >= 0.0; break;
    case K::bernoulli: ok = ok && d.a >= 0.0 && d.a <= 1.0 && d.b >= 0.0; break;
    case K::constant: ok = ok && d.a >= 0.0; break;
    case K::uniform: ok = ok && d.a >= 0.0 && d.b >= d.a; break;
  }
  if (!ok) throw ConfigError("arrivals: invalid distribution parameters");
}

double draw(const ArrivalDistribution& d, SplitMix64& rng) {
  using K = ArrivalDistribution::Kind;
  switch (d.kind) {
    case K::poisson: {
      if (d.a <= 0.0) return 0.0;
      std::poisson_distribution<long> dist(d.a);
      return static_cast<double>(dist(rng));
    }
    case K::bernoulli: return rng.uniform() < d.a ? d.b : 0.0;
    case K::constant: return d.a;
    case K::uniform: return d.a + (d.b - d.a) * rng.uniform();
  }
  return 0.0;
}

}  // namespace

ArrivalSpec::ArrivalSpec(const NetworkGraph& graph, std::vector<ArrivalEntry> entries)
    : nodes_(graph.num_nodes()), commodities_(graph.num_commodities()), entries_(std::move(entries)) {
  std::set<std::pair<NodeId, CommodityId>> seen;
  for (const ArrivalEntry& e : entries_) {
    if (e.node < 0 || e.node >= nodes_ || e.commodity < 0 || e.commodity >= commodities_) {
      throw ConfigError("arrivals: entry references an unknown node or commodity");
    }
    if (graph.destination(e.commodity) == e.node) {
      throw ConfigError("arrivals: commodity " + std::to_string(e.commodity) +
                        " cannot arrive at its own destination");
    }
    if (!seen.insert({e.node, e.commodity}).second) {
      throw ConfigError("arrivals: duplicate entry for node " + std::to_string(e.node) +
                        ", commodity " + std::to_string(e.commodity));
    }
    validate(e.distribution);
  }
}

void sample_arrivals_into(const ArrivalSpec& spec, std::uint64_t seed, std::int64_t slot, Matrix& out) {
  if (out.rows() != static_cast<std::size_t>(spec.num_nodes()) ||
      out.cols() != static_cast<std::size_t>(spec.num_commodities())) {
    out = Matrix(spec.num_nodes(), spec.num_commodities());
  } else {
    out.fill(0.0);
  }
  for (const ArrivalEntry& e : spec.entries()) {
    SplitMix64 rng(hash_key({seed, static_cast<std::uint64_t>(e.node),
                             static_cast<std::uint64_t>(e.commodity), static_cast<std::uint64_t>(slot)}));
    out(e.node, e.commodity) = draw(e.distribution, rng);
  }
}

Matrix sample_arrivals(const ArrivalSpec& spec, std::uint64_t seed, std::int64_t slot) {
  Matrix out(spec.num_nodes(), spec.num_commodities());
  sample_arrivals_into(spec, seed, slot, out);
  return out;
}

Matrix mean_rates(const ArrivalSpec& spec) {
  Matrix out(spec.num_nodes(), spec.num_commodities());
  for (const ArrivalEntry& e : spec.entries()) out(e.node, e.commodity) = e.distribution.mean();
  return out;
}

Matrix arrival_caps(const ArrivalSpec& spec) {
  Matrix out(spec.num_nodes(), spec.num_commodities());
  for (const ArrivalEntry& e : spec.entries()) out(e.node, e.commodity) = e.distribution.max();
  return out;
}

}  // namespace bpsim
