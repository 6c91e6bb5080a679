#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "bpsim/margin.hpp"
#include "doctest.h"

using namespace bpsim;

namespace {

using Sense = LinearProgram::Sense;

// Best objective over all basic solutions of {A x <= b, x >= 0} in 3
// variables, by solving every 3x3 subsystem of the tight constraints.
double vertex_enumeration(const std::vector<std::array<double, 3>>& A, const std::vector<double>& b,
                          const std::array<double, 3>& c, bool& feasible) {
  std::vector<std::array<double, 4>> planes;
  for (std::size_t i = 0; i < A.size(); ++i) planes.push_back({A[i][0], A[i][1], A[i][2], b[i]});
  for (int j = 0; j < 3; ++j) {
    std::array<double, 4> p{0, 0, 0, 0};
    p[j] = -1;
    planes.push_back(p);
  }
  double best = -std::numeric_limits<double>::infinity();
  feasible = false;
  const std::size_t m = planes.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      for (std::size_t k = j + 1; k < m; ++k) {
        double M[3][4];
        for (int r = 0; r < 3; ++r) {
          const auto& p = planes[r == 0 ? i : r == 1 ? j : k];
          for (int q = 0; q < 4; ++q) M[r][q] = p[q];
        }
        // Gaussian elimination with partial pivoting.
        bool singular = false;
        for (int col = 0; col < 3 && !singular; ++col) {
          int piv = col;
          for (int r = col + 1; r < 3; ++r) {
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
          }
          if (std::abs(M[piv][col]) < 1e-12) {
            singular = true;
            break;
          }
          std::swap(M[col], M[piv]);
          for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = M[r][col] / M[col][col];
            for (int q = col; q < 4; ++q) M[r][q] -= f * M[col][q];
          }
        }
        if (singular) continue;
        const double x[3] = {M[0][3] / M[0][0], M[1][3] / M[1][1], M[2][3] / M[2][2]};
        bool ok = true;
        for (const auto& p : planes) ok = ok && p[0] * x[0] + p[1] * x[1] + p[2] * x[2] <= p[3] + 1e-9;
        if (!ok) continue;
        feasible = true;
        best = std::max(best, c[0] * x[0] + c[1] * x[1] + c[2] * x[2]);
      }
    }
  }
  return best;
}

// Edmonds-Karp max flow on a dense capacity matrix.
double max_flow(std::vector<std::vector<double>> cap, int s, int t) {
  const int n = static_cast<int>(cap.size());
  double total = 0.0;
  while (true) {
    std::vector<int> prev(n, -1);
    prev[s] = s;
    std::deque<int> q{s};
    while (!q.empty() && prev[t] < 0) {
      const int a = q.front();
      q.pop_front();
      for (int b = 0; b < n; ++b) {
        if (prev[b] < 0 && cap[a][b] > 1e-12) {
          prev[b] = a;
          q.push_back(b);
        }
      }
    }
    if (prev[t] < 0) return total;
    double push = std::numeric_limits<double>::infinity();
    for (int v = t; v != s; v = prev[v]) push = std::min(push, cap[prev[v]][v]);
    for (int v = t; v != s; v = prev[v]) {
      cap[prev[v]][v] -= push;
      cap[v][prev[v]] += push;
    }
    total += push;
  }
}

}  // namespace

TEST_CASE("LP: textbook maximum with certificate") {
  LinearProgram lp;
  const int x = lp.add_var(3, "x"), y = lp.add_var(2, "y");
  lp.add_row({{x, 1}, {y, 1}}, Sense::le, 4);
  lp.add_row({{x, 1}, {y, 3}}, Sense::le, 6);
  lp.add_row({{x, 1}}, Sense::le, 3);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(11.0));
  CHECK(r.x[0] == doctest::Approx(3.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
  CHECK(r.duality_gap <= 1e-9);
  CHECK(r.max_dual_violation <= 1e-9);
  CHECK(lp_to_json(lp, &r).find("\"objective\"") != std::string::npos);
}

TEST_CASE("LP: equality and >= rows, infeasible and unbounded") {
  LinearProgram lp;
  const int x = lp.add_var(-1), y = lp.add_var(-1);
  lp.add_row({{x, 1}, {y, 2}}, Sense::ge, 4);
  lp.add_row({{x, 1}, {y, -1}}, Sense::eq, 1);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.optimal());
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
  CHECK(r.duality_gap <= 1e-9);

  LinearProgram bad;
  const int v = bad.add_var(1);
  bad.add_row({{v, 1}}, Sense::le, 1);
  bad.add_row({{v, 1}}, Sense::ge, 2);
  CHECK(solve_lp(bad).status == LpResult::Status::infeasible);

  LinearProgram open;
  const int w = open.add_var(1);
  open.add_row({{w, -1}}, Sense::le, 1);
  CHECK(solve_lp(open).status == LpResult::Status::unbounded);
}

TEST_CASE("LP agrees with vertex enumeration on random programs") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> coef(-3, 5), rhs(0, 10), cost(-2, 4);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::array<double, 3>> A(5);
    std::vector<double> b(5);
    LinearProgram lp;
    std::array<double, 3> c{};
    for (int j = 0; j < 3; ++j) {
      c[j] = cost(rng);
      lp.add_var(c[j]);
    }
    // Keep the region bounded with a box row.
    A[0] = {1, 1, 1};
    b[0] = 12;
    for (int i = 1; i < 5; ++i) {
      for (int j = 0; j < 3; ++j) A[i][j] = coef(rng);
      b[i] = rhs(rng) - 3;
    }
    for (int i = 0; i < 5; ++i) {
      lp.add_row({{0, A[i][0]}, {1, A[i][1]}, {2, A[i][2]}}, Sense::le, b[i]);
    }
    bool feasible = false;
    const double best = vertex_enumeration(A, b, c, feasible);
    const LpResult r = solve_lp(lp);
    if (!feasible) {
      CHECK(r.status == LpResult::Status::infeasible);
      continue;
    }
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-9));
    CHECK(r.max_primal_violation <= 1e-9);
    CHECK(r.duality_gap <= 1e-7);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("max margin: residual capacity examples") {
  NetworkGraph g(2, {{0, 1}});
  g.add_commodity(1);
  Matrix lam(2, 1);
  lam(0, 0) = 0.3;
  const MarginResult m = max_margin(g, {1.0}, lam);
  CHECK(m.feasible);
  CHECK(m.eps == doctest::Approx(0.7).epsilon(1e-12));

  NetworkGraph h(2, {{0, 1}});
  h.add_commodity(1);
  h.add_commodity(1);
  Matrix lam2(2, 2);
  lam2(0, 0) = lam2(0, 1) = 0.3;
  const MarginResult s = max_margin(h, {1.0}, lam2);
  CHECK(s.eps == doctest::Approx(0.2).epsilon(1e-12));
  Matrix demand = lam2;
  demand(0, 0) += s.eps;
  demand(0, 1) += s.eps;
  CHECK(flow_violation(h, {1.0}, s.flows, demand) <= 1e-9);

  lam2(0, 0) = lam2(0, 1) = 0.7;
  const MarginResult over = max_margin(h, {1.0}, lam2);
  CHECK_FALSE(over.feasible);
  CHECK(over.eps == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("max margin: disconnected commodity is reported") {
  NetworkGraph g(3, {{0, 1}});
  g.add_commodity(1);
  g.add_commodity(2);
  Matrix lam(3, 2);
  lam(0, 0) = 0.2;
  lam(0, 1) = 0.2;
  const MarginResult m = max_margin(g, {1.0}, lam);
  CHECK_FALSE(m.feasible);
  CHECK_FALSE(m.connected);
  REQUIRE(m.disconnected.size() == 1);
  CHECK(m.disconnected[0] == 1);
}

TEST_CASE("max margin on the default topology respects the cut bound and is certified") {
  NetworkGraph g = build_clustered_grid(4, 4, 2, 2, 3);
  const int pairs[8][4] = {{1, 3, 2, 5}, {2, 3, 2, 7}, {2, 2, 1, 6}, {3, 4, 2, 7},
                           {1, 1, 1, 7}, {4, 3, 5, 4}, {4, 6, 6, 6}, {5, 3, 5, 6}};
  std::vector<NodeId> src;
  for (const auto& p : pairs) {
    src.push_back(*g.node_at(p[0], p[1]));
    g.add_commodity(*g.node_at(p[2], p[3]));
  }
  const auto caps = expected_capacities(g, wireline_rate_model(g, 1.0));
  // Directed capacity of the left-to-right cut and the commodities crossing it.
  double cut = 0.0;
  for (const Link& l : g.links()) cut += g.positions()[l.from].global_col < 4 && g.positions()[l.to].global_col >= 4;
  int crossing = 0;
  for (const auto& p : pairs) crossing += p[1] < 4 && p[3] >= 4;
  for (double lambda : {0.2, 0.5}) {
    Matrix lam(64, 8);
    for (int c = 0; c < 8; ++c) lam(src[c], c) = lambda;
    const MarginResult m = max_margin(g, caps, lam);
    CHECK(m.feasible);
    CHECK(m.eps <= cut / crossing - lambda + 1e-9);
    Matrix demand = lam;
    for (int c = 0; c < 8; ++c) demand(src[c], c) += m.eps;
    CHECK(flow_violation(g, caps, m.flows, demand) <= 1e-7);
    CHECK(m.lp_result.duality_gap <= 1e-7);
  }
}

TEST_CASE("theta-optimal rates: closed-form cases") {
  NetworkGraph g(2, {{0, 1}});
  g.add_commodity(1);
  Matrix lam(2, 1);
  lam(0, 0) = 3;
  const ThetaOptimalResult r = theta_optimal_rates(g, {1.0}, lam, Matrix(2, 1), UtilitySpec::log());
  REQUIRE(r.feasible);
  CHECK(r.rates(0, 0) == doctest::Approx(1.0).epsilon(1e-6));

  NetworkGraph h(2, {{0, 1}});
  h.add_commodity(1);
  h.add_commodity(1);
  Matrix lam2(2, 2);
  lam2(0, 0) = lam2(0, 1) = 3;
  const ThetaOptimalResult s = theta_optimal_rates(h, {1.0}, lam2, Matrix(2, 2), UtilitySpec::log());
  CHECK(s.rates(0, 0) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(s.rates(0, 1) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("theta-optimal rates match a max-flow grid search on random 6-node instances") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 6, s1 = 0, s2 = 1, d = 5;
    std::vector<Link> links;
    std::vector<double> caps;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a != b && a != d && unit(rng) < 0.45) {
          links.push_back({a, b});
          caps.push_back(1.0 + std::floor(unit(rng) * 3.0));
        }
      }
    }
    NetworkGraph g(n, links);
    g.add_commodity(d);
    g.add_commodity(d);
    const double lam1 = 2.0, lam2 = 1.5, theta = trial % 2 == 0 ? 0.0 : 0.1;
    Matrix lam(n, 2), th(n, 2);
    lam(s1, 0) = lam1;
    lam(s2, 1) = lam2;
    th(s1, 0) = th(s2, 1) = theta;

    // Same destination, so routability is a single max-flow from a super source.
    auto routable = [&](double r1, double r2) {
      std::vector<std::vector<double>> cap(n + 1, std::vector<double>(n + 1, 0.0));
      for (std::size_t l = 0; l < links.size(); ++l) cap[links[l].from][links[l].to] += caps[l];
      cap[n][s1] = r1 + theta;
      cap[n][s2] = r2 + theta;
      return max_flow(cap, n, d) >= r1 + r2 + 2 * theta - 1e-9;
    };
    if (!routable(0.0, 0.0) || !routable(1e-3, 0.0) || !routable(0.0, 1e-3)) continue;
    double best = -std::numeric_limits<double>::infinity(), best_r1 = 0.0, best_r2 = 0.0;
    for (int i = 1; i <= 2000; ++i) {
      const double r1 = lam1 * i / 2000.0;
      if (!routable(r1, 0.0)) break;
      double lo = 0.0, hi = lam2;
      if (routable(r1, hi)) {
        lo = hi;
      } else {
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          (routable(r1, mid) ? lo : hi) = mid;
        }
      }
      if (lo <= 0.0) continue;
      const double u = std::log(r1) + std::log(lo);
      if (u > best) best = u, best_r1 = r1, best_r2 = lo;
    }
    const ThetaOptimalResult r = theta_optimal_rates(g, caps, lam, th, UtilitySpec::log());
    REQUIRE(r.feasible);
    CHECK(std::abs(r.utility - best) <= 1e-3);
    CHECK(r.utility >= best - 1e-9);
    CHECK(std::abs(r.rates(s1, 0) - best_r1) <= 2e-2);
    CHECK(std::abs(r.rates(s2, 1) - best_r2) <= 2e-2);
    ++checked;
  }
  CHECK(checked >= 2);
}

TEST_CASE("eps_z and margin split") {
  NetworkGraph g = build_clustered_grid(4, 4, 2, 2, 3);
  g.add_commodity(3);
  const Matrix ez = eps_z(g, 1.0, 20.0);
  CHECK(ez(0, 0) == doctest::Approx(22.4));
  CHECK(eps_z(g, 1.0, std::numeric_limits<double>::infinity()).sum() == 0.0);

  NetworkGraph one(2, {{0, 1}});
  one.add_commodity(1);
  CHECK(eps_z(one, 1.0, 2.0)(0, 0) == 1.0);
  const MarginSplit s = split_margin(one, 0.8, eps_z(one, 1.0, 10.0));
  CHECK(s.valid);
  CHECK(s.eps(0, 0) == doctest::Approx(0.5));
  CHECK(s.delta(0, 0) == doctest::Approx(0.3));
  CHECK_FALSE(split_margin(one, 0.1, eps_z(one, 1.0, 10.0)).valid);
}
