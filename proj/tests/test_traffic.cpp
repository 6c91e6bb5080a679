#include <cmath>

#include "bpsim/traffic.hpp"
#include "doctest.h"

using namespace bpsim;

namespace {

NetworkGraph two_commodity_line() {
  NetworkGraph g(3, {{0, 1}, {1, 2}});
  g.add_commodity(2);
  g.add_commodity(2);
  return g;
}

}  // namespace

TEST_CASE("empty spec gives zeros") {
  const NetworkGraph g = two_commodity_line();
  const ArrivalSpec spec(g, {});
  const Matrix a = sample_arrivals(spec, 1, 0);
  CHECK(a.sum() == 0.0);
  CHECK(mean_rates(spec).sum() == 0.0);
}

TEST_CASE("constant arrivals land only on their entry") {
  const NetworkGraph g = two_commodity_line();
  const ArrivalSpec spec(g, {{0, 1, ArrivalDistribution::constant(0.4)}});
  const Matrix a = sample_arrivals(spec, 5, 17);
  CHECK(a(0, 1) == 0.4);
  CHECK(a.sum() == doctest::Approx(0.4));
}

TEST_CASE("means and caps") {
  CHECK(ArrivalDistribution::poisson(0.3).mean() == 0.3);
  CHECK(ArrivalDistribution::bernoulli(0.5, 2).mean() == 1.0);
  CHECK(ArrivalDistribution::uniform(0.2, 0.6).mean() == doctest::Approx(0.4));
  CHECK(std::isinf(ArrivalDistribution::poisson(0.3).max()));
  CHECK(ArrivalDistribution::bernoulli(0.5, 2).max() == 2.0);
  CHECK(ArrivalDistribution::uniform(0.2, 0.6).max() == 0.6);
}

TEST_CASE("sample means match within 3 sigma") {
  const NetworkGraph g = two_commodity_line();
  struct Case {
    ArrivalDistribution d;
    double variance;
  };
  const Case cases[] = {{ArrivalDistribution::poisson(0.3), 0.3},
                        {ArrivalDistribution::bernoulli(0.5, 2), 4 * 0.25},
                        {ArrivalDistribution::uniform(0.0, 0.8), 0.64 / 12}};
  for (const Case& c : cases) {
    const ArrivalSpec spec(g, {{0, 0, c.d}});
    const int slots = 100000;
    double sum = 0.0;
    for (int t = 0; t < slots; ++t) sum += sample_arrivals(spec, 42, t)(0, 0);
    const double sigma = std::sqrt(c.variance / slots);
    CHECK(std::abs(sum / slots - c.d.mean()) <= 3 * sigma);
  }
}

TEST_CASE("samples are keyed by seed, entry and slot") {
  const NetworkGraph g = two_commodity_line();
  const ArrivalSpec spec(g, {{0, 0, ArrivalDistribution::poisson(2.0)}, {1, 1, ArrivalDistribution::poisson(2.0)}});
  const ArrivalSpec alone(g, {{0, 0, ArrivalDistribution::poisson(2.0)}});
  int differ = 0;
  for (int t = 0; t < 200; ++t) {
    const Matrix a = sample_arrivals(spec, 7, t);
    CHECK(a == sample_arrivals(spec, 7, t));
    // Adding an entry does not perturb the others.
    CHECK(a(0, 0) == sample_arrivals(alone, 7, t)(0, 0));
    differ += a(0, 0) != sample_arrivals(spec, 8, t)(0, 0);
  }
  CHECK(differ > 50);
}

TEST_CASE("arrival validation") {
  const NetworkGraph g = two_commodity_line();
  CHECK_THROWS_AS(ArrivalSpec(g, {{2, 0, ArrivalDistribution::constant(1)}}), ConfigError);
  CHECK_THROWS_AS(ArrivalSpec(g, {{5, 0, ArrivalDistribution::constant(1)}}), ConfigError);
  CHECK_THROWS_AS(ArrivalSpec(g, {{0, 0, ArrivalDistribution::bernoulli(1.5, 1)}}), ConfigError);
  CHECK_THROWS_AS(ArrivalSpec(g, {{0, 0, ArrivalDistribution::uniform(0.5, 0.1)}}), ConfigError);
  CHECK_THROWS_AS(
      ArrivalSpec(g, {{0, 0, ArrivalDistribution::constant(1)}, {0, 0, ArrivalDistribution::constant(2)}}),
      ConfigError);
}
