#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bpsim {

// maximize c'x subject to rows (<=, =, >=) and x >= 0.
struct LinearProgram {
  enum class Sense { le, eq, ge };
  struct Row {
    std::vector<std::pair<int, double>> terms;
    Sense sense = Sense::le;
    double rhs = 0.0;
    std::string name;
  };

  int num_vars = 0;
  std::vector<double> objective;
  std::vector<std::string> var_names;
  std::vector<Row> rows;

  int add_var(double cost, std::string name = {});
  int add_row(std::vector<std::pair<int, double>> terms, Sense sense, double rhs, std::string name = {});
};

struct LpOptions {
  double tolerance = 1e-9;
  long max_iterations = 200000;
};

struct LpResult {
  enum class Status { optimal, infeasible, unbounded, iteration_limit };
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> duals;     // one per row, sign convention of the original rows
  double dual_objective = 0.0;   // b'y
  double duality_gap = 0.0;      // |c'x - b'y|
  double max_dual_violation = 0.0;  // largest violation of A'y >= c (sign-adjusted)
  double max_primal_violation = 0.0;
  long iterations = 0;

  bool optimal() const { return status == Status::optimal; }
};

std::string status_name(LpResult::Status s);

// Two-phase dense simplex. Duals are read from the reduced costs of the
// identity columns of the starting basis.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

// JSON document with the program and, when given, its solution certificate.
std::string lp_to_json(const LinearProgram& lp, const LpResult* result = nullptr);

}  // namespace bpsim
