#include "bpsim/mdp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bpsim {

namespace {

constexpr std::size_t kMaxStates = 1000000;

int integer_rate(double r) {
  const double f = std::floor(r + 1e-9);
  if (std::abs(r - f) > 1e-9) throw ConfigError("mdp: link rates must be integers");
  return static_cast<int>(f);
}

}  // namespace

MdpSpec::MdpSpec(std::shared_ptr<const NetworkGraph> graph, std::shared_ptr<const RateModel> rates, int queue_cap,
                 std::vector<ArrivalPmf> arrivals)
    : graph_(std::move(graph)), rates_(std::move(rates)), cap_(queue_cap), arrivals_(std::move(arrivals)) {
  if (!graph_ || !rates_) throw ConfigError("mdp: graph and rate model are required");
  if (cap_ < 0) throw ConfigError("mdp: queue cap must be >= 0");
  if (rates_->num_links() != graph_->num_links()) throw ConfigError("mdp: rate model does not match graph");
  for (int s = 0; s < rates_->num_states(); ++s) {
    for (int a = 0; a < rates_->num_actions(); ++a) {
      for (double r : rates_->rates(s, a)) integer_rate(r);
    }
  }
  const int N = graph_->num_nodes();
  const int C = graph_->num_commodities();
  queue_index_.assign(static_cast<std::size_t>(N) * C, -1);
  for (NodeId n = 0; n < N; ++n) {
    for (CommodityId c = 0; c < C; ++c) {
      if (graph_->destination(c) == n) continue;
      queue_index_[static_cast<std::size_t>(n) * C + c] = static_cast<int>(queue_node_.size());
      queue_node_.push_back(n);
      queue_commodity_.push_back(c);
    }
  }
  for (std::size_t q = 0; q < queue_node_.size(); ++q) {
    num_states_ *= static_cast<std::size_t>(cap_ + 1);
    if (num_states_ > kMaxStates) throw ConfigError("mdp: state space exceeds 10^6 states");
  }

  // Product of independent per-queue pmfs.
  std::vector<std::vector<double>> per_queue(queue_node_.size(), std::vector<double>{1.0});
  for (const ArrivalPmf& a : arrivals_) {
    const int q = queue_of(a.node, a.commodity);
    if (q < 0) throw ConfigError("mdp: arrivals at a destination or unknown queue");
    if (per_queue[q].size() != 1 || per_queue[q][0] != 1.0) throw ConfigError("mdp: duplicate arrival pmf");
    double total = 0.0;
    for (double p : a.pmf) {
      if (!(p >= 0.0)) throw ConfigError("mdp: negative arrival probability");
      total += p;
    }
    if (a.pmf.empty() || std::abs(total - 1.0) > 1e-9) throw ConfigError("mdp: arrival pmf must sum to 1");
    per_queue[q] = a.pmf;
  }
  outcomes_.push_back({std::vector<int>(queue_node_.size(), 0), 1.0});
  for (std::size_t q = 0; q < per_queue.size(); ++q) {
    std::vector<ArrivalOutcome> next;
    for (const auto& o : outcomes_) {
      for (std::size_t k = 0; k < per_queue[q].size(); ++k) {
        if (per_queue[q][k] == 0.0) continue;
        ArrivalOutcome e = o;
        e.amount[q] = static_cast<int>(k);
        e.probability *= per_queue[q][k];
        next.push_back(std::move(e));
      }
    }
    outcomes_ = std::move(next);
  }
}

int MdpSpec::queue_of(NodeId n, CommodityId c) const {
  return queue_index_[static_cast<std::size_t>(n) * graph_->num_commodities() + c];
}

std::vector<int> MdpSpec::decode(std::size_t state) const {
  std::vector<int> u(queue_node_.size());
  for (std::size_t q = 0; q < u.size(); ++q) {
    u[q] = static_cast<int>(state % (cap_ + 1));
    state /= (cap_ + 1);
  }
  return u;
}

std::size_t MdpSpec::encode(const std::vector<int>& queues) const {
  std::size_t s = 0;
  for (std::size_t q = queues.size(); q-- > 0;) s = s * (cap_ + 1) + queues[q];
  return s;
}

double MdpSpec::cost(std::size_t state) const {
  double total = 0.0;
  for (int v : decode(state)) total += v;
  return total;
}

std::vector<MdpSpec::Action> MdpSpec::actions(int topology_state, std::size_t state) const {
  const auto u = decode(state);
  const int C = graph_->num_commodities();
  struct Slot {
    LinkId l;
    CommodityId c;
    int queue;
  };
  std::vector<Slot> slots;
  for (LinkId l = 0; l < graph_->num_links(); ++l) {
    for (CommodityId c = 0; c < C; ++c) {
      if (!graph_->allowed(c, l)) continue;
      const int q = queue_of(graph_->link(l).from, c);
      if (q >= 0) slots.push_back({l, c, q});
    }
  }
  std::vector<Action> out;
  for (int I = 0; I < rates_->num_actions(); ++I) {
    std::vector<int> link_left(graph_->num_links());
    for (LinkId l = 0; l < graph_->num_links(); ++l) link_left[l] = integer_rate(rates_->rate(topology_state, I, l));
    std::vector<int> queue_left = u;
    Action current{I, std::vector<int>(static_cast<std::size_t>(graph_->num_links()) * C, 0)};
    std::function<void(std::size_t)> recurse = [&](std::size_t k) {
      if (k == slots.size()) {
        out.push_back(current);
        return;
      }
      const Slot& sl = slots[k];
      const int limit = std::min(link_left[sl.l], queue_left[sl.queue]);
      for (int v = 0; v <= limit; ++v) {
        current.nu[static_cast<std::size_t>(sl.l) * C + sl.c] = v;
        link_left[sl.l] -= v;
        queue_left[sl.queue] -= v;
        recurse(k + 1);
        link_left[sl.l] += v;
        queue_left[sl.queue] += v;
      }
      current.nu[static_cast<std::size_t>(sl.l) * C + sl.c] = 0;
    };
    recurse(0);
  }
  return out;
}

std::size_t MdpSpec::next_state(std::size_t state, const std::vector<int>& nu, const std::vector<int>& arrivals,
                                int* dropped) const {
  auto u = decode(state);
  const int C = graph_->num_commodities();
  for (LinkId l = 0; l < graph_->num_links(); ++l) {
    const Link& k = graph_->link(l);
    for (CommodityId c = 0; c < C; ++c) {
      const int v = nu[static_cast<std::size_t>(l) * C + c];
      if (v == 0) continue;
      const int from = queue_of(k.from, c);
      const int to = queue_of(k.to, c);
      if (from < 0 || !graph_->allowed(c, l)) throw std::invalid_argument("mdp: transfer on an invalid pair");
      u[from] -= v;
      if (to >= 0) u[to] += v;
    }
  }
  int lost = 0;
  for (std::size_t q = 0; q < u.size(); ++q) {
    if (u[q] < 0) throw std::invalid_argument("mdp: transfer exceeds backlog");
    u[q] += arrivals[q];
    if (u[q] > cap_) {
      lost += u[q] - cap_;
      u[q] = cap_;
    }
  }
  if (dropped) *dropped = lost;
  return encode(u);
}

namespace {

// Successor lists per (topology state, queue state, action, arrival outcome).
struct Kernel {
  std::vector<std::vector<MdpSpec::Action>> actions;   // index s * S + u
  std::vector<std::vector<std::uint32_t>> successors;  // parallel: action-major, outcome-minor
};

Kernel build_kernel(const MdpSpec& spec) {
  const std::size_t S = spec.num_states();
  const int T = spec.rates().num_states();
  const auto& outcomes = spec.arrival_outcomes();
  Kernel k;
  k.actions.resize(S * T);
  k.successors.resize(S * T);
  for (int s = 0; s < T; ++s) {
    for (std::size_t u = 0; u < S; ++u) {
      auto& acts = k.actions[s * S + u];
      acts = spec.actions(s, u);
      auto& succ = k.successors[s * S + u];
      succ.reserve(acts.size() * outcomes.size());
      for (const auto& a : acts) {
        for (const auto& o : outcomes) succ.push_back(static_cast<std::uint32_t>(spec.next_state(u, a.nu, o.amount)));
      }
    }
  }
  return k;
}

// Expected next value of each action at (s, u).
void action_values(const MdpSpec& spec, const Kernel& k, std::size_t idx, const std::vector<double>& V,
                   std::vector<double>& out) {
  const auto& outcomes = spec.arrival_outcomes();
  const auto& succ = k.successors[idx];
  const std::size_t A = k.actions[idx].size();
  out.assign(A, 0.0);
  for (std::size_t a = 0; a < A; ++a) {
    double v = 0.0;
    for (std::size_t o = 0; o < outcomes.size(); ++o) v += outcomes[o].probability * V[succ[a * outcomes.size() + o]];
    out[a] = v;
  }
}

std::size_t first_argmin(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < values.size(); ++a) {
    if (values[a] < values[best] - 1e-12 * (1.0 + std::abs(values[best]))) best = a;
  }
  return best;
}

// Backpressure decision from per-queue potentials (dest potential 0),
// capped by backlog with the decreasing-rate rule.
MdpSpec::Action potential_decision(const MdpSpec& spec, int s, const std::vector<int>& u,
                                   const std::vector<double>& potential) {
  const NetworkGraph& g = spec.graph();
  const RateModel& rates = spec.rates();
  const int C = g.num_commodities();
  const int L = g.num_links();
  auto pot = [&](NodeId n, CommodityId c) {
    const int q = spec.queue_of(n, c);
    return q < 0 ? 0.0 : potential[q];
  };
  std::vector<int> c_star(L, -1);
  std::vector<double> w_star(L, 0.0);
  for (LinkId l = 0; l < L; ++l) {
    const Link& k = g.link(l);
    double best = -std::numeric_limits<double>::infinity();
    for (CommodityId c = 0; c < C; ++c) {
      if (!g.allowed(c, l) || spec.queue_of(k.from, c) < 0) continue;
      const double w = pot(k.from, c) - pot(k.to, c);
      if (c_star[l] < 0 || w > best) {
        best = w;
        c_star[l] = c;
      }
    }
    if (c_star[l] >= 0 && best > 0.0) w_star[l] = best;
  }
  int I = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < rates.num_actions(); ++a) {
    double v = 0.0;
    for (LinkId l = 0; l < L; ++l) v += w_star[l] * rates.rate(s, a, l);
    if (v > best_value) {
      best_value = v;
      I = a;
    }
  }
  MdpSpec::Action act{I, std::vector<int>(static_cast<std::size_t>(L) * C, 0)};
  std::vector<int> mu(static_cast<std::size_t>(L) * C, 0);
  for (LinkId l = 0; l < L; ++l) {
    if (w_star[l] > 0.0) mu[static_cast<std::size_t>(l) * C + c_star[l]] = integer_rate(rates.rate(s, I, l));
  }
  for (int q = 0; q < spec.num_queues(); ++q) {
    const NodeId n = spec.queue_node(q);
    const CommodityId c = spec.queue_commodity(q);
    auto out = g.out_links(n);
    std::vector<LinkId> order(out.begin(), out.end());
    std::stable_sort(order.begin(), order.end(), [&](LinkId x, LinkId y) {
      const int mx = mu[static_cast<std::size_t>(x) * C + c];
      const int my = mu[static_cast<std::size_t>(y) * C + c];
      return mx != my ? mx > my : x < y;
    });
    int remaining = u[q];
    for (LinkId l : order) {
      const int give = std::min(mu[static_cast<std::size_t>(l) * C + c], remaining);
      act.nu[static_cast<std::size_t>(l) * C + c] = give;
      remaining -= give;
    }
  }
  return act;
}

PolicyTable potential_policy(const MdpSpec& spec,
                             const std::function<std::vector<double>(std::size_t, const std::vector<int>&)>& potential) {
  const std::size_t S = spec.num_states();
  PolicyTable table;
  table.topology_states = spec.rates().num_states();
  table.decisions.resize(S * table.topology_states);
  for (std::size_t u = 0; u < S; ++u) {
    const auto q = spec.decode(u);
    const auto p = potential(u, q);
    for (int s = 0; s < table.topology_states; ++s) table.decisions[s * S + u] = potential_decision(spec, s, q, p);
  }
  return table;
}

}  // namespace

ValueIterationResult relative_value_iteration(const MdpSpec& spec, double tol, int max_iters, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("relative_value_iteration: tau must be in (0, 1]");
  const std::size_t S = spec.num_states();
  const int T = spec.rates().num_states();
  const Kernel k = build_kernel(spec);
  std::vector<double> cost(S);
  for (std::size_t u = 0; u < S; ++u) cost[u] = spec.cost(u);

  ValueIterationResult r;
  r.V.assign(S, 0.0);
  std::vector<double> TV(S), values;
  for (r.iterations = 1; r.iterations <= max_iters; ++r.iterations) {
    for (std::size_t u = 0; u < S; ++u) {
      double expected = 0.0;
      for (int s = 0; s < T; ++s) {
        action_values(spec, k, s * S + u, r.V, values);
        expected += spec.rates().state_probability(s) * *std::min_element(values.begin(), values.end());
      }
      TV[u] = cost[u] + expected;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t u = 0; u < S; ++u) {
      const double diff = TV[u] - r.V[u];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    r.residual = hi - lo;
    r.d = 0.5 * (hi + lo);
    if (r.residual < tol) {
      r.converged = true;
      break;
    }
    for (std::size_t u = 0; u < S; ++u) r.V[u] += tau * (TV[u] - r.V[u]);
    const double anchor = r.V[0];
    for (double& v : r.V) v -= anchor;
  }
  if (r.iterations > max_iters) r.iterations = max_iters;
  return r;
}

PolicyTable optimal_policy(const MdpSpec& spec, const std::vector<double>& V) {
  const std::size_t S = spec.num_states();
  if (V.size() != S) throw std::invalid_argument("optimal_policy: value table has the wrong size");
  const Kernel k = build_kernel(spec);
  PolicyTable table;
  table.topology_states = spec.rates().num_states();
  table.decisions.resize(S * table.topology_states);
  std::vector<double> values;
  for (int s = 0; s < table.topology_states; ++s) {
    for (std::size_t u = 0; u < S; ++u) {
      action_values(spec, k, s * S + u, V, values);
      table.decisions[s * S + u] = k.actions[s * S + u][first_argmin(values)];
    }
  }
  return table;
}

PolicyTable asymptotic_policy(const MdpSpec& spec, const std::vector<double>& V) {
  const std::size_t S = spec.num_states();
  if (V.size() != S) throw std::invalid_argument("asymptotic_policy: value table has the wrong size");
  const int cap = spec.queue_cap();
  return potential_policy(spec, [&](std::size_t u, const std::vector<int>& q) {
    std::vector<double> d(q.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (cap == 0) continue;
      auto shifted = [&](int delta) {
        auto v = q;
        v[i] += delta;
        return V[spec.encode(v)];
      };
      if (q[i] == 0) {
        d[i] = shifted(1) - V[u];
      } else if (q[i] == cap) {
        d[i] = V[u] - shifted(-1);
      } else {
        d[i] = 0.5 * (shifted(1) - shifted(-1));
      }
    }
    return d;
  });
}

PolicyTable bp_policy(const MdpSpec& spec) {
  return potential_policy(spec, [](std::size_t, const std::vector<int>& q) {
    return std::vector<double>(q.begin(), q.end());
  });
}

PolicyEvaluation evaluate_policy(const MdpSpec& spec, const PolicyTable& policy) {
  const std::size_t S = spec.num_states();
  const int T = spec.rates().num_states();
  if (policy.topology_states != T || policy.decisions.size() != S * T) {
    throw std::invalid_argument("evaluate_policy: policy table does not match the spec");
  }
  const auto& outcomes = spec.arrival_outcomes();

  // Row-stochastic transition matrix and expected drops.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(S);
  std::vector<double> drops(S, 0.0);
  for (std::size_t u = 0; u < S; ++u) {
    std::vector<std::pair<std::size_t, double>> row;
    for (int s = 0; s < T; ++s) {
      const double ps = spec.rates().state_probability(s);
      const auto& nu = policy.at(s, u, S).nu;
      for (const auto& o : outcomes) {
        int dropped = 0;
        const std::size_t v = spec.next_state(u, nu, o.amount, &dropped);
        row.push_back({v, ps * o.probability});
        drops[u] += ps * o.probability * dropped;
      }
    }
    std::sort(row.begin(), row.end());
    for (const auto& e : row) {
      if (!rows[u].empty() && rows[u].back().first == e.first) {
        rows[u].back().second += e.second;
      } else if (e.second > 0.0) {
        rows[u].push_back(e);
      }
    }
  }

  // Tarjan's strongly connected components, iterative.
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(S, none), low(S, 0), comp(S, none);
  std::vector<char> on_stack(S, 0);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, components = 0;
  for (std::size_t root = 0; root < S; ++root) {
    if (index[root] != none) continue;
    std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, i] = call.back();
      if (i < rows[v].size()) {
        const std::size_t w = rows[v][i++].first;
        if (index[w] == none) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = components;
        } while (w != v);
        ++components;
      }
      const std::size_t finished = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }
  std::vector<char> closed(components, 1);
  for (std::size_t u = 0; u < S; ++u) {
    for (const auto& [v, p] : rows[u]) {
      if (comp[v] != comp[u]) closed[comp[u]] = 0;
    }
  }

  PolicyEvaluation out;
  out.stationary.assign(S, 0.0);
  std::vector<int> class_of_comp(components, -1);
  for (std::size_t c = 0; c < components; ++c) {
    if (!closed[c]) continue;
    class_of_comp[c] = static_cast<int>(out.classes.size());
    out.classes.push_back({});
  }
  for (std::size_t u = 0; u < S; ++u) {
    const int k = class_of_comp[comp[u]];
    if (k >= 0) out.classes[k].states.push_back(u);
  }

  std::vector<std::vector<double>> pis;
  std::vector<double> class_drops;
  for (auto& cls : out.classes) {
    const std::size_t m = cls.states.size();
    std::vector<long> local(S, -1);
    for (std::size_t i = 0; i < m; ++i) local[cls.states[i]] = static_cast<long>(i);
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t u = cls.states[i];
      if (i + 1 < m) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), -1.0);
      for (const auto& [v, p] : rows[u]) {
        const long j = local[v];
        if (j >= 0 && static_cast<std::size_t>(j) + 1 < m) trips.emplace_back(static_cast<int>(j), static_cast<int>(i), p);
      }
      trips.emplace_back(static_cast<int>(m - 1), static_cast<int>(i), 1.0);
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(m), static_cast<int>(m));
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<int>(m));
    b(static_cast<int>(m) - 1) = 1.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("evaluate_policy: stationary system is singular");
    Eigen::VectorXd pi = lu.solve(b);
    std::vector<double> p(m);
    double cost = 0.0, drop = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      p[i] = pi(static_cast<int>(i));
      cost += p[i] * spec.cost(cls.states[i]);
      drop += p[i] * drops[cls.states[i]];
    }
    cls.average_cost = cost;
    pis.push_back(std::move(p));
    class_drops.push_back(drop);
  }
  out.unichain = out.classes.size() == 1;

  // Absorption probabilities from the empty state by propagating its
  // distribution until the transient mass vanishes.
  if (out.unichain) {
    out.classes[0].absorption_from_empty = 1.0;
  } else {
    std::vector<double> x(S, 0.0), y(S);
    x[0] = 1.0;
    for (int it = 0; it < 1000000; ++it) {
      double transient = 0.0;
      for (std::size_t u = 0; u < S; ++u) {
        if (class_of_comp[comp[u]] < 0) transient += x[u];
      }
      if (transient < 1e-14) break;
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t u = 0; u < S; ++u) {
        if (x[u] == 0.0) continue;
        for (const auto& [v, p] : rows[u]) y[v] += x[u] * p;
      }
      std::swap(x, y);
    }
    for (std::size_t u = 0; u < S; ++u) {
      const int k = class_of_comp[comp[u]];
      if (k >= 0) out.classes[k].absorption_from_empty += x[u];
    }
  }
  for (std::size_t k = 0; k < out.classes.size(); ++k) {
    const double w = out.classes[k].absorption_from_empty;
    out.average_cost += w * out.classes[k].average_cost;
    out.drop_rate += w * class_drops[k];
    for (std::size_t i = 0; i < out.classes[k].states.size(); ++i) out.stationary[out.classes[k].states[i]] += w * pis[k][i];
  }
  return out;
}

namespace {

std::string queue_header(const MdpSpec& spec) {
  std::ostringstream os;
  for (int q = 0; q < spec.num_queues(); ++q) os << ",u_n" << spec.queue_node(q) << "_c" << spec.queue_commodity(q);
  return os.str();
}

}  // namespace

std::string value_table_csv(const MdpSpec& spec, const ValueIterationResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "state" << queue_header(spec) << ",V,d\n";
  for (std::size_t u = 0; u < spec.num_states(); ++u) {
    os << u;
    for (int v : spec.decode(u)) os << ',' << v;
    os << ',' << result.V[u] << ',' << result.d << '\n';
  }
  return os.str();
}

std::string policy_table_csv(const MdpSpec& spec, const PolicyTable& policy) {
  const int C = spec.graph().num_commodities();
  std::ostringstream os;
  os << "topology_state,state" << queue_header(spec) << ",resource,transfers\n";
  for (int s = 0; s < policy.topology_states; ++s) {
    for (std::size_t u = 0; u < spec.num_states(); ++u) {
      const auto& a = policy.at(s, u, spec.num_states());
      os << s << ',' << u;
      for (int v : spec.decode(u)) os << ',' << v;
      os << ',' << a.resource << ',';
      bool first = true;
      for (std::size_t i = 0; i < a.nu.size(); ++i) {
        if (a.nu[i] == 0) continue;
        const auto& link = spec.graph().link(static_cast<LinkId>(i / C));
        os << (first ? "" : ";") << link.from << "->" << link.to << ":c" << i % C << "=" << a.nu[i];
        first = false;
      }
      os << '\n';
    }
  }
  return os.str();
}

namespace {

MdpSpec unit_link_mdp(int nodes, std::vector<Link> links, NodeId dest, int cap, std::vector<ArrivalPmf> arrivals) {
  auto g = std::make_shared<NetworkGraph>(nodes, std::move(links));
  g->add_commodity(dest);
  auto r = std::make_shared<RateModel>(wireline_rate_model(*g, 1.0));
  return MdpSpec(g, r, cap, std::move(arrivals));
}

}  // namespace

MdpSpec single_queue_mdp(double p, int cap) { return tandem_mdp(1, p, cap); }

MdpSpec tandem_mdp(int links, double p, int cap) {
  if (links < 1) throw ConfigError("tandem: need at least one link");
  std::vector<Link> ls;
  for (int i = 0; i < links; ++i) ls.push_back({i, i + 1});
  return unit_link_mdp(links + 1, std::move(ls), links, cap, {{0, 0, {1.0 - p, p}}});
}

MdpSpec diamond_mdp(std::vector<double> source_pmf, double cross_traffic, int cap) {
  std::vector<ArrivalPmf> arrivals{{0, 0, std::move(source_pmf)}};
  if (cross_traffic > 0.0) arrivals.push_back({1, 0, {1.0 - cross_traffic, cross_traffic}});
  return unit_link_mdp(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, 3, cap, std::move(arrivals));
}

}  // namespace bpsim
