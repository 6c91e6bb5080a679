#include "bpsim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace bpsim {

int LinearProgram::add_var(double cost, std::string name) {
  objective.push_back(cost);
  var_names.push_back(name.empty() ? "x" + std::to_string(num_vars) : std::move(name));
  return num_vars++;
}

int LinearProgram::add_row(std::vector<std::pair<int, double>> terms, Sense sense, double rhs, std::string name) {
  for (const auto& [j, v] : terms) {
    if (j < 0 || j >= num_vars) throw std::invalid_argument("lp: row references an unknown variable");
    if (!std::isfinite(v)) throw std::invalid_argument("lp: non-finite coefficient");
  }
  if (!std::isfinite(rhs)) throw std::invalid_argument("lp: non-finite right-hand side");
  rows.push_back({std::move(terms), sense, rhs, std::move(name)});
  return static_cast<int>(rows.size()) - 1;
}

std::string status_name(LpResult::Status s) {
  switch (s) {
    case LpResult::Status::optimal: return "optimal";
    case LpResult::Status::infeasible: return "infeasible";
    case LpResult::Status::unbounded: return "unbounded";
    case LpResult::Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(int m, int n) : m_(m), n_(n), data_(static_cast<std::size_t>(m) * (n + 1), 0.0), basis_(m, -1) {}

  double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }
  double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }
  double& rhs(int i) { return at(i, n_); }
  int rows() const { return m_; }
  int cols() const { return n_; }
  std::vector<int>& basis() { return basis_; }

  // Reduced costs d_j = c_j - c_B' T_j and objective value c_B' rhs.
  void price(const std::vector<double>& cost, std::vector<double>& reduced, double& value) const {
    reduced.assign(cost.begin(), cost.end());
    value = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &data_[static_cast<std::size_t>(i) * (n_ + 1)];
      for (int j = 0; j < n_; ++j) reduced[j] -= cb * row[j];
      value += cb * row[n_];
    }
  }

  void pivot(int p, int q, std::vector<double>& reduced, double& value) {
    double* prow = &data_[static_cast<std::size_t>(p) * (n_ + 1)];
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (int j = 0; j <= n_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    }
    prow[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == p) continue;
      double* row = &data_[static_cast<std::size_t>(i) * (n_ + 1)];
      const double f = row[q];
      if (f == 0.0) continue;
      for (int j : nz_) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    const double fr = reduced[q];
    if (fr != 0.0) {
      for (int j : nz_) {
        if (j < n_) reduced[j] -= fr * prow[j];
      }
      value += fr * prow[n_];
      reduced[q] = 0.0;
    }
    basis_[p] = q;
  }

 private:
  int m_;
  int n_;
  std::vector<double> data_;
  std::vector<int> basis_;
  std::vector<int> nz_;
};

enum class Outcome { optimal, unbounded, iteration_limit };

// Primal simplex on the current basis. Columns with allowed[j] == 0 never enter.
Outcome iterate(Tableau& t, std::vector<double>& reduced, double& value, const std::vector<char>& allowed,
                double tol, long& iterations, long max_iterations) {
  int degenerate_run = 0;
  while (true) {
    if (iterations >= max_iterations) return Outcome::iteration_limit;
    const bool bland = degenerate_run > 50;
    int q = -1;
    double best = tol;
    for (int j = 0; j < t.cols(); ++j) {
      if (!allowed[j] || reduced[j] <= tol) continue;
      if (bland) {
        q = j;
        break;
      }
      if (reduced[j] > best) {
        best = reduced[j];
        q = j;
      }
    }
    if (q < 0) return Outcome::optimal;
    int p = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, q);
      if (a <= tol) continue;
      const double r = t.rhs(i) / a;
      if (r < ratio - 1e-12 || (r <= ratio + 1e-12 && p >= 0 && t.basis()[i] < t.basis()[p])) {
        ratio = r;
        p = i;
      }
    }
    if (p < 0) return Outcome::unbounded;
    degenerate_run = ratio <= tol ? degenerate_run + 1 : 0;
    t.pivot(p, q, reduced, value);
    ++iterations;
  }
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
  if (static_cast<int>(lp.objective.size()) != lp.num_vars) throw std::invalid_argument("lp: objective size mismatch");
  const int m = static_cast<int>(lp.rows.size());
  const int nv = lp.num_vars;
  const double tol = options.tolerance;

  // Column layout: structural | slack/surplus | artificial.
  std::vector<double> sign(m, 1.0);
  std::vector<int> slack_col(m, -1);
  int cols = nv;
  for (int i = 0; i < m; ++i) {
    if (lp.rows[i].sense != LinearProgram::Sense::eq) slack_col[i] = cols++;
  }
  std::vector<int> identity_col(m, -1);
  std::vector<char> is_artificial;
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    sign[i] = row.rhs < 0.0 ? -1.0 : 1.0;
    const double slack_coef = row.sense == LinearProgram::Sense::le ? 1.0 : -1.0;
    if (slack_col[i] >= 0 && slack_coef * sign[i] > 0.0) {
      identity_col[i] = slack_col[i];
    } else {
      art_rows.push_back(i);
    }
  }
  for (int i : art_rows) identity_col[i] = cols++;
  is_artificial.assign(cols, 0);
  for (int i : art_rows) is_artificial[identity_col[i]] = 1;

  Tableau t(m, cols);
  for (int i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    for (const auto& [j, v] : row.terms) t.at(i, j) += sign[i] * v;
    if (slack_col[i] >= 0) t.at(i, slack_col[i]) = sign[i] * (row.sense == LinearProgram::Sense::le ? 1.0 : -1.0);
    if (is_artificial[identity_col[i]]) t.at(i, identity_col[i]) = 1.0;
    t.rhs(i) = sign[i] * row.rhs;
    t.basis()[i] = identity_col[i];
  }

  LpResult result;
  std::vector<double> reduced;
  double value = 0.0;
  std::vector<char> allowed(cols, 1);

  if (!art_rows.empty()) {
    std::vector<double> phase1(cols, 0.0);
    for (int j = 0; j < cols; ++j) {
      if (is_artificial[j]) phase1[j] = -1.0;
    }
    t.price(phase1, reduced, value);
    Outcome o = iterate(t, reduced, value, allowed, tol, result.iterations, options.max_iterations);
    if (o == Outcome::iteration_limit) {
      result.status = LpResult::Status::iteration_limit;
      return result;
    }
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(lp.rows[i].rhs));
    if (value < -1e-7 * scale) {
      result.status = LpResult::Status::infeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (!is_artificial[t.basis()[i]]) continue;
      for (int j = 0; j < cols; ++j) {
        if (!is_artificial[j] && std::abs(t.at(i, j)) > 1e-7) {
          t.pivot(i, j, reduced, value);
          break;
        }
      }
    }
    for (int j = 0; j < cols; ++j) {
      if (is_artificial[j]) allowed[j] = 0;
    }
  }

  std::vector<double> cost(cols, 0.0);
  std::copy(lp.objective.begin(), lp.objective.end(), cost.begin());
  t.price(cost, reduced, value);
  Outcome o = iterate(t, reduced, value, allowed, tol, result.iterations, options.max_iterations);
  if (o == Outcome::iteration_limit) {
    result.status = LpResult::Status::iteration_limit;
    return result;
  }
  if (o == Outcome::unbounded) {
    result.status = LpResult::Status::unbounded;
    return result;
  }

  result.status = LpResult::Status::optimal;
  result.x.assign(nv, 0.0);
  for (int i = 0; i < m; ++i) {
    if (t.basis()[i] < nv) result.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
  }
  result.objective = 0.0;
  for (int j = 0; j < nv; ++j) result.objective += lp.objective[j] * result.x[j];

  // Identity column e_i has zero cost, so its reduced cost is -y_i.
  result.duals.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double y = -reduced[identity_col[i]];
    if (std::abs(y) < 1e-13) y = 0.0;
    result.duals[i] = sign[i] * y;
  }
  result.dual_objective = 0.0;
  for (int i = 0; i < m; ++i) result.dual_objective += lp.rows[i].rhs * result.duals[i];
  result.duality_gap = std::abs(result.objective - result.dual_objective);

  // Certificate checks in the original rows.
  std::vector<double> aty(nv, 0.0);
  for (int i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    double lhs = 0.0;
    for (const auto& [j, v] : row.terms) {
      lhs += v * result.x[j];
      aty[j] += v * result.duals[i];
    }
    double viol = 0.0;
    switch (row.sense) {
      case LinearProgram::Sense::le: viol = lhs - row.rhs; break;
      case LinearProgram::Sense::ge: viol = row.rhs - lhs; break;
      case LinearProgram::Sense::eq: viol = std::abs(lhs - row.rhs); break;
    }
    result.max_primal_violation = std::max(result.max_primal_violation, viol);
    const double wrong_sign = row.sense == LinearProgram::Sense::le ? -result.duals[i]
                              : row.sense == LinearProgram::Sense::ge ? result.duals[i]
                                                                      : 0.0;
    result.max_dual_violation = std::max(result.max_dual_violation, wrong_sign);
  }
  for (int j = 0; j < nv; ++j) {
    result.max_dual_violation = std::max(result.max_dual_violation, lp.objective[j] - aty[j]);
  }
  return result;
}

std::string lp_to_json(const LinearProgram& lp, const LpResult* result) {
  using nlohmann::json;
  json doc;
  doc["sense"] = "maximize";
  doc["variables"] = lp.var_names;
  doc["objective"] = lp.objective;
  json rows = json::array();
  for (const auto& row : lp.rows) {
    json r;
    r["name"] = row.name;
    r["sense"] = row.sense == LinearProgram::Sense::le ? "<=" : row.sense == LinearProgram::Sense::ge ? ">=" : "=";
    r["rhs"] = row.rhs;
    json terms = json::array();
    for (const auto& [j, v] : row.terms) terms.push_back({j, v});
    r["terms"] = terms;
    rows.push_back(r);
  }
  doc["rows"] = rows;
  if (result) {
    json cert;
    cert["status"] = status_name(result->status);
    cert["objective"] = result->objective;
    cert["x"] = result->x;
    cert["duals"] = result->duals;
    cert["dual_objective"] = result->dual_objective;
    cert["duality_gap"] = result->duality_gap;
    cert["max_primal_violation"] = result->max_primal_violation;
    cert["max_dual_violation"] = result->max_dual_violation;
    doc["certificate"] = cert;
  }
  return doc.dump(1);
}

}  // namespace bpsim
