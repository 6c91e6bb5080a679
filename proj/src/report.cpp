#include "bpsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "bpsim/bias.hpp"
#include "bpsim/margin.hpp"
#include "json.hpp"

namespace bpsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_tradeoff(const Scenario& s) { return s.sweep && s.sweep->parameter == SweepParameter::M; }

std::string sweep_name(const Scenario& s) { return s.sweep ? parameter_name(s.sweep->parameter) : "run"; }

std::string fixed(double x, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << x;
  return ss.str();
}

}  // namespace

double row_backlog(const ResultRow& row) { return row.metrics.avg_total_backlog; }
double row_utility(const ResultRow& row) { return row.metrics.flow_control ? row.metrics.utility_at_rbar : kNaN; }

std::vector<Curve> curves(const std::vector<ResultRow>& rows, MetricFn metric) {
  std::vector<Curve> out;
  std::vector<std::vector<std::vector<double>>> samples;
  for (const ResultRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Curve& c) { return c.policy == r.policy; });
    if (it == out.end()) {
      out.push_back({r.policy, {}, {}, {}});
      samples.emplace_back();
      it = out.end() - 1;
    }
    auto& cs = samples[static_cast<std::size_t>(it - out.begin())];
    // NaN sweep values (single runs) compare unequal, so match them explicitly.
    auto vit = std::find_if(it->values.begin(), it->values.end(), [&](double v) {
      return v == r.value || (std::isnan(v) && std::isnan(r.value));
    });
    if (vit == it->values.end()) {
      it->values.push_back(r.value);
      cs.emplace_back();
      vit = it->values.end() - 1;
    }
    cs[static_cast<std::size_t>(vit - it->values.begin())].push_back(metric(r));
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (const auto& xs : samples[k]) {
      double sum = 0.0;
      for (double x : xs) sum += x;
      const double mean = sum / static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      const double n = static_cast<double>(xs.size());
      out[k].mean.push_back(mean);
      out[k].stderr_.push_back(xs.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0);
    }
  }
  return out;
}

const Curve* find_curve(const std::vector<Curve>& cs, const std::string& policy) {
  for (const Curve& c : cs) {
    if (c.policy == policy) return &c;
  }
  return nullptr;
}

double max_ratio(const Curve& policy, const Curve& reference) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < policy.values.size(); ++i) {
    for (std::size_t j = 0; j < reference.values.size(); ++j) {
      if (reference.values[j] == policy.values[i] && reference.mean[j] > 0.0) {
        worst = std::max(worst, policy.mean[i] / reference.mean[j]);
      }
    }
  }
  return worst;
}

std::string headline(const Scenario& s, const std::vector<ResultRow>& rows) {
  std::ostringstream o;
  const auto backlog = curves(rows, row_backlog);
  if (is_tradeoff(s)) {
    const auto utility = curves(rows, row_utility);
    o << s.id << ": utility / average backlog per M\n";
    for (std::size_t k = 0; k < backlog.size(); ++k) {
      o << "  " << std::left << std::setw(22) << backlog[k].policy;
      for (std::size_t i = 0; i < backlog[k].values.size(); ++i) {
        o << "  M=" << backlog[k].values[i] << ": " << fixed(utility[k].mean[i], 3) << " / "
          << fixed(backlog[k].mean[i], 1);
      }
      o << "\n";
    }
    return o.str();
  }
  const Curve* bp = find_curve(backlog, "BP");
  o << s.id << ": average backlog";
  if (bp) o << " and ratio to BP";
  if (s.sweep) o << " per " << sweep_name(s);
  o << "\n";
  for (const Curve& c : backlog) {
    o << "  " << std::left << std::setw(22) << c.policy;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      o << "  ";
      if (!std::isnan(c.values[i])) o << c.values[i] << ": ";
      o << fixed(c.mean[i], 2);
      if (bp && c.policy != "BP" && i < bp->mean.size() && bp->mean[i] > 0.0) {
        o << " (" << fixed(c.mean[i] / bp->mean[i], 3) << ")";
      }
    }
    if (bp && c.policy != "BP") o << "  max ratio " << fixed(max_ratio(c, *bp), 3);
    o << "\n";
  }
  return o.str();
}

std::string headline_json(const Scenario& s, const std::vector<ResultRow>& rows) {
  nlohmann::json doc = nlohmann::json::object();
  const auto backlog = curves(rows, row_backlog);
  const auto utility = curves(rows, row_utility);
  const Curve* bp = find_curve(backlog, "BP");
  for (std::size_t k = 0; k < backlog.size(); ++k) {
    nlohmann::json entry;
    entry["values"] = backlog[k].values;
    entry["avg_backlog"] = backlog[k].mean;
    if (is_tradeoff(s)) entry["utility_at_rbar"] = utility[k].mean;
    if (bp && backlog[k].policy != "BP" && !is_tradeoff(s)) entry["max_ratio_to_bp"] = max_ratio(backlog[k], *bp);
    doc[backlog[k].policy] = entry;
  }
  return doc.dump(2);
}

PlotSpec scenario_plot(const Scenario& s, const std::vector<ResultRow>& rows) {
  PlotSpec p;
  p.title = s.id;
  const auto backlog = curves(rows, row_backlog);
  if (is_tradeoff(s)) {
    const auto utility = curves(rows, row_utility);
    p.x_label = "utility at admitted rates";
    p.y_label = "average total backlog";
    for (std::size_t k = 0; k < backlog.size(); ++k) {
      p.series.push_back({backlog[k].policy, utility[k].mean, backlog[k].mean});
    }
    return p;
  }
  p.x_label = sweep_name(s);
  p.y_label = "average total backlog";
  p.log_y = true;
  for (const Curve& c : backlog) p.series.push_back({c.policy, c.values, c.mean});
  return p;
}

MarginReport margin_report(const Scenario& s) {
  Scenario sc = s;
  if (s.margin.lambda) {
    for (CommodityConfig& c : sc.commodities) {
      const double v = *s.margin.lambda;
      auto& d = c.arrival;
      switch (d.kind) {
        case ArrivalDistribution::Kind::poisson:
        case ArrivalDistribution::Kind::constant: d.a = v; break;
        case ArrivalDistribution::Kind::bernoulli: d.a = v / d.b; break;
        case ArrivalDistribution::Kind::uniform: {
          const double half = std::min(0.5 * (d.b - d.a), v);
          d.a = v - half;
          d.b = v + half;
          break;
        }
      }
    }
  }
  const BuiltScenario b = build_scenario(sc);
  const NetworkGraph& g = *b.graph;
  const auto caps = expected_capacities(g, *b.rates);
  const Matrix lambda = mean_rates(b.arrivals);
  Matrix mask(g.num_nodes(), g.num_commodities());
  for (CommodityId c = 0; c < g.num_commodities(); ++c) mask(b.sources[c], c) = 1.0;

  MarginReport r;
  const MarginResult m = max_margin(g, caps, lambda, mask);
  r.routable = m.feasible;
  r.eps = m.eps;
  r.eps_at_lower_bound = m.eps_at_lower_bound;
  r.disconnected.assign(m.disconnected.begin(), m.disconnected.end());
  r.lp_duality_gap = m.lp_result.duality_gap;
  r.in_degree = max_in_degree(g);
  r.max_rate = b.rates->max_rate();

  r.z = std::numeric_limits<double>::infinity();
  if (s.margin.z) {
    r.z = *s.margin.z;
  } else {
    for (const PolicyConfig& p : s.policies) {
      if (p.algorithm != Algorithm::bp && p.algorithm != Algorithm::bpbias) {
        r.z = p.z;
        break;
      }
    }
  }
  const Matrix ez = eps_z(g, r.max_rate, r.z);
  for (double x : ez.values()) r.eps_z = std::max(r.eps_z, x);
  if (m.feasible && m.eps > 0.0) r.min_z = min_z(r.max_rate, r.in_degree, m.eps);

  const Matrix acaps = arrival_caps(b.arrivals);
  bool bounded = true;
  for (double x : acaps.values()) bounded = bounded && std::isfinite(x);
  if (!bounded) {
    r.bound_note = "not applicable: arrivals are unbounded";
  } else {
    const MarginResult full = max_margin(g, caps, lambda, non_destination_mask(g));
    const MarginSplit split = split_margin(g, full.eps, ez);
    if (!full.feasible || !split.valid) {
      r.bound_note = "not applicable: margin " + fixed(full.eps, 6) + " does not exceed eps_z";
    } else {
      r.bound = backlog_bound(g, *b.rates, acaps, split.eps, split.delta, r.z).bound;
    }
  }
  return r;
}

std::string format_margin_report(const MarginReport& r) {
  std::ostringstream o;
  o << "routable: " << (r.routable ? "yes" : "no") << "\n";
  o << "max margin eps: " << fixed(r.eps, 9);
  if (r.eps_at_lower_bound) o << " (infeasible even with all demand removed)";
  o << "\n";
  for (int c : r.disconnected) o << "commodity " << c << ": destination unreachable from source\n";
  o << "in-degree d_in: " << r.in_degree << ", R_max: " << r.max_rate << "\n";
  o << "z: " << r.z << ", eps_z (max entry): " << fixed(r.eps_z, 6) << "\n";
  if (r.min_z) {
    o << "min_z = 2 R_max d_in / eps: " << fixed(*r.min_z, 6) << "\n";
  } else {
    o << "min_z: none (no positive margin)\n";
  }
  if (r.bound) {
    o << "backlog bound: " << fixed(*r.bound, 6) << "\n";
  } else {
    o << "backlog bound: " << r.bound_note << "\n";
  }
  o << "LP duality gap: " << r.lp_duality_gap << "\n";
  return o.str();
}

}  // namespace bpsim
