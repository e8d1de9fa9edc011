#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace freestop::lp {

enum class Sense { Equal, LessEqual, GreaterEqual };

struct Row {
  std::vector<std::pair<std::size_t, double>> terms;
  Sense sense = Sense::Equal;
  double rhs = 0.0;
};

/// minimize cost.x subject to rows, x >= 0.
struct LinearProgram {
  std::vector<double> cost;
  std::vector<Row> rows;

  std::size_t num_vars() const noexcept { return cost.size(); }
  std::size_t add_var(double c) {
    cost.push_back(c);
    return cost.size() - 1;
  }
  std::size_t add_row(Row row) {
    rows.push_back(std::move(row));
    return rows.size() - 1;
  }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-11;
  std::size_t max_pivots = 200000;
};

struct Solution {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  /// Row multipliers y with reduced costs cost - A^T y >= 0 at optimality.
  std::vector<double> duals;
  /// Basic column per row; indices >= num_vars denote slack or artificial
  /// columns.
  std::vector<std::size_t> basis;
  /// Optimal value of the phase-1 problem (sum of artificial variables).
  double infeasibility = 0.0;
  /// When infeasible: y with A^T y <= 0 over the structural and slack
  /// columns and rhs.y = infeasibility > 0.
  std::vector<double> farkas;
  std::size_t pivots = 0;
};

/// Dense two-phase primal simplex (Dantzig pricing, Bland's rule after a run
/// of degenerate pivots). The final basis is re-solved with an LU
/// factorization to clean up primal values and duals.
Solution solve(const LinearProgram& program, const Options& options = {});

std::string to_string(Status status);

}  // namespace freestop::lp
