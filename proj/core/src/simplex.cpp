#include "freestop/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "freestop/error.hpp"

namespace freestop::lp {

namespace {

constexpr std::size_t kDegenerateRunBeforeBland = 50;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_(rows * (cols + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) noexcept { return t_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const noexcept { return t_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) noexcept { return t_[i * (n_ + 1) + n_]; }
  double rhs(std::size_t i) const noexcept { return t_[i * (n_ + 1) + n_]; }
  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }

  void pivot(std::size_t r, std::size_t q, std::vector<double>& reduced, double& objective) {
    const double p = at(r, q);
    double* row_r = &t_[r * (n_ + 1)];
    for (std::size_t j = 0; j <= n_; ++j) row_r[j] /= p;
    row_r[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row_i = &t_[i * (n_ + 1)];
      const double f = row_i[q];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) row_i[j] -= f * row_r[j];
      row_i[q] = 0.0;
    }
    const double f = reduced[q];
    if (f != 0.0) {
      for (std::size_t j = 0; j < n_; ++j) reduced[j] -= f * row_r[j];
      objective += f * row_r[n_];
      reduced[q] = 0.0;
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
};

struct Standardized {
  std::size_t m = 0;
  std::size_t n_struct = 0;
  std::size_t n_slack = 0;
  std::size_t n_total = 0;  // structural + slack + artificial
  std::vector<double> flip;  // +-1 per row
  Eigen::MatrixXd A;         // m x n_total, transformed rows
  Eigen::VectorXd b;
  std::vector<double> cost;  // phase-2 costs per column
  std::size_t artificial(std::size_t row) const noexcept { return n_struct + n_slack + row; }
  bool is_artificial(std::size_t col) const noexcept { return col >= n_struct + n_slack; }
};

Standardized standardize(const LinearProgram& lp) {
  Standardized s;
  s.m = lp.rows.size();
  s.n_struct = lp.num_vars();
  for (const auto& row : lp.rows)
    if (row.sense != Sense::Equal) ++s.n_slack;
  s.n_total = s.n_struct + s.n_slack + s.m;
  s.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.m), static_cast<Eigen::Index>(s.n_total));
  s.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.m));
  s.flip.assign(s.m, 1.0);
  s.cost.assign(s.n_total, 0.0);
  std::copy(lp.cost.begin(), lp.cost.end(), s.cost.begin());

  std::size_t slack = s.n_struct;
  for (std::size_t i = 0; i < s.m; ++i) {
    const auto& row = lp.rows[i];
    const auto ii = static_cast<Eigen::Index>(i);
    for (const auto& [j, v] : row.terms) {
      if (j >= s.n_struct) throw StructuralError("LP row references an unknown variable");
      s.A(ii, static_cast<Eigen::Index>(j)) += v;
    }
    if (row.sense == Sense::LessEqual) s.A(ii, static_cast<Eigen::Index>(slack++)) = 1.0;
    if (row.sense == Sense::GreaterEqual) s.A(ii, static_cast<Eigen::Index>(slack++)) = -1.0;
    s.b(ii) = row.rhs;
    if (row.rhs < 0.0) {
      s.flip[i] = -1.0;
      s.A.row(ii) *= -1.0;
      s.b(ii) *= -1.0;
    }
    s.A(ii, static_cast<Eigen::Index>(s.artificial(i))) = 1.0;
  }
  return s;
}

// Runs simplex iterations on `tab` with the given reduced costs until
// optimal. Returns Unbounded / IterationLimit / Optimal.
Status iterate(Tableau& tab, std::vector<std::size_t>& basis, std::vector<double>& reduced,
               double& objective, const std::vector<bool>& may_enter, const Options& opt,
               std::size_t& pivots) {
  bool bland = false;
  std::size_t degenerate_run = 0;
  const std::size_t m = tab.rows();
  const std::size_t n = tab.cols();
  while (true) {
    if (pivots >= opt.max_pivots) return Status::IterationLimit;
    std::size_t q = n;
    double best = -opt.optimality_tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (!may_enter[j] || reduced[j] >= -opt.optimality_tol) continue;
      if (bland) {
        q = j;
        break;
      }
      if (reduced[j] < best) {
        best = reduced[j];
        q = j;
      }
    }
    if (q == n) return Status::Optimal;

    std::size_t r = m;
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = tab.at(i, q);
      if (a <= opt.pivot_tol) continue;
      const double v = std::max(tab.rhs(i), 0.0) / a;
      const double slack = 1e-14 * std::max(1.0, v);
      if (r == m || v < ratio - slack || (v <= ratio + slack && basis[i] < basis[r])) {
        ratio = v;
        r = i;
      }
    }
    if (r == m) return Status::Unbounded;
    degenerate_run = ratio == 0.0 ? degenerate_run + 1 : 0;
    if (degenerate_run > kDegenerateRunBeforeBland) bland = true;
    tab.pivot(r, q, reduced, objective);
    basis[r] = q;
    ++pivots;
  }
}

// Solves B^T y = c_B for the current basis.
std::vector<double> basis_duals(const Standardized& s, const std::vector<std::size_t>& basis,
                                const std::vector<double>& col_cost) {
  const auto m = static_cast<Eigen::Index>(s.m);
  Eigen::MatrixXd B(m, m);
  Eigen::VectorXd cb(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    B.col(i) = s.A.col(static_cast<Eigen::Index>(basis[static_cast<std::size_t>(i)]));
    cb(i) = col_cost[basis[static_cast<std::size_t>(i)]];
  }
  const Eigen::VectorXd y = B.transpose().partialPivLu().solve(cb);
  std::vector<double> out(s.m);
  for (std::size_t i = 0; i < s.m; ++i) out[i] = s.flip[i] * y(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace

Solution solve(const LinearProgram& program, const Options& opt) {
  for (const auto& row : program.rows)
    if (!std::isfinite(row.rhs)) throw DomainError("LP right-hand side is not finite");

  Solution sol;
  const Standardized s = standardize(program);
  const std::size_t m = s.m;
  const std::size_t nt = s.n_total;

  if (m == 0) {
    sol.x.assign(s.n_struct, 0.0);
    for (double c : program.cost)
      if (c < 0.0) {
        sol.status = Status::Unbounded;
        return sol;
      }
    sol.status = Status::Optimal;
    return sol;
  }

  Tableau tab(m, nt);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nt; ++j)
      tab.at(i, j) = s.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    tab.rhs(i) = s.b(static_cast<Eigen::Index>(i));
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = s.artificial(i);

  // Phase 1: minimize the sum of artificials.
  std::vector<double> phase1_cost(nt, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase1_cost[s.artificial(i)] = 1.0;
  std::vector<double> reduced(nt, 0.0);
  double objective = 0.0;  // tracks -z in tableau convention
  for (std::size_t j = 0; j < nt; ++j) {
    if (s.is_artificial(j)) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += tab.at(i, j);
    reduced[j] = -sum;
  }
  std::vector<bool> may_enter(nt, true);
  Status st = iterate(tab, basis, reduced, objective, may_enter, opt, sol.pivots);
  if (st == Status::IterationLimit) {
    sol.status = st;
    return sol;
  }
  double infeas = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (s.is_artificial(basis[i])) infeas += std::max(tab.rhs(i), 0.0);
  sol.infeasibility = infeas;
  if (infeas > opt.feasibility_tol) {
    sol.status = Status::Infeasible;
    sol.farkas = basis_duals(s, basis, phase1_cost);
    sol.basis = basis;
    return sol;
  }

  // Drive zero-level artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (!s.is_artificial(basis[i])) continue;
    std::size_t q = nt;
    double big = opt.pivot_tol * 100.0;
    for (std::size_t j = 0; j < nt; ++j) {
      if (s.is_artificial(j)) continue;
      if (std::abs(tab.at(i, j)) > big) {
        big = std::abs(tab.at(i, j));
        q = j;
      }
    }
    if (q == nt) continue;  // redundant row
    tab.pivot(i, q, reduced, objective);
    basis[i] = q;
  }

  // Phase 2. Artificial columns stay out.
  for (std::size_t i = 0; i < m; ++i) may_enter[s.artificial(i)] = false;
  objective = 0.0;
  for (std::size_t j = 0; j < nt; ++j) {
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) z += s.cost[basis[i]] * tab.at(i, j);
    reduced[j] = s.cost[j] - z;
  }
  for (std::size_t i = 0; i < m; ++i) reduced[basis[i]] = 0.0;
  st = iterate(tab, basis, reduced, objective, may_enter, opt, sol.pivots);
  sol.status = st;
  sol.basis = basis;
  if (st != Status::Optimal) return sol;

  // Clean primal values and duals from a fresh factorization of the basis.
  const auto mm = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd B(mm, mm);
  for (Eigen::Index i = 0; i < mm; ++i)
    B.col(i) = s.A.col(static_cast<Eigen::Index>(basis[static_cast<std::size_t>(i)]));
  const Eigen::VectorXd xb = B.partialPivLu().solve(s.b);
  sol.x.assign(s.n_struct, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = basis[i];
    if (j < s.n_struct) {
      double v = xb(static_cast<Eigen::Index>(i));
      if (v < 0.0 && v > -opt.feasibility_tol) v = 0.0;
      sol.x[j] = v;
    }
  }
  sol.duals = basis_duals(s, basis, s.cost);
  sol.objective = 0.0;
  for (std::size_t j = 0; j < s.n_struct; ++j) sol.objective += program.cost[j] * sol.x[j];
  return sol;
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "?";
}

}  // namespace freestop::lp
