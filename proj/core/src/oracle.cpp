#include "freestop/oracle.hpp"

#include <cmath>
#include <sstream>

#include "freestop/error.hpp"
#include "freestop/simplex.hpp"

namespace freestop::oracle {

std::size_t lp_variable_count(const Problem& problem) {
  const auto& lat = problem.lattice();
  const std::size_t K = lat.steps();
  const std::size_t N = lat.num_nodes();
  return K * N * problem.controls().size() + (K + 1) * N;
}

LpResult lp_solve(const Problem& problem) {
  const auto& kernel = problem.kernel();
  const auto& lat = problem.lattice();
  const std::size_t K = lat.steps();
  const std::size_t N = lat.num_nodes();
  const std::size_t U = problem.controls().size();
  const std::size_t vars = lp_variable_count(problem);
  if (vars > kMaxLpVariables) {
    std::ostringstream msg;
    msg << "lp_solve refuses instances above " << kMaxLpVariables << " variables (this one has "
        << vars << ")";
    throw DomainError(msg.str());
  }
  const CostTable costs(kernel, problem.lagrangian());

  auto c_var = [&](std::size_t k, std::size_t i, std::size_t u) { return (k * N + i) * U + u; };
  const std::size_t s_base = K * N * U;
  auto s_var = [&](std::size_t k, std::size_t i) { return s_base + k * N + i; };

  lp::LinearProgram prog;
  prog.cost.assign(vars, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t u = 0; u < U; ++u) prog.cost[c_var(k, i, u)] = costs.step_cost(k, i, u);

  // Flow rows (k, x) for k = 0..K, then marginal rows x.
  std::vector<lp::Row> flow((K + 1) * N);
  for (std::size_t k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < N; ++i) {
      auto& row = flow[k * N + i];
      if (k < K)
        for (std::size_t u = 0; u < U; ++u) row.terms.emplace_back(c_var(k, i, u), 1.0);
      row.terms.emplace_back(s_var(k, i), 1.0);
      row.rhs = k == 0 ? problem.mu()[i] : 0.0;
    }
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t u = 0; u < U; ++u)
        for (const auto& e : kernel.row(i, u))
          flow[(k + 1) * N + e.target].terms.emplace_back(c_var(k, i, u), -e.prob);
  for (auto& row : flow) prog.add_row(std::move(row));
  for (std::size_t i = 0; i < N; ++i) {
    lp::Row row;
    for (std::size_t k = 0; k <= K; ++k) row.terms.emplace_back(s_var(k, i), 1.0);
    row.rhs = problem.nu()[i];
    prog.add_row(std::move(row));
  }

  const auto sol = lp::solve(prog);
  if (sol.status == lp::Status::Infeasible) {
    std::ostringstream msg;
    msg << "target marginal is unreachable: phase-1 infeasibility " << sol.infeasibility;
    throw InfeasibleError(msg.str(), sol.farkas);
  }
  if (sol.status != lp::Status::Optimal) {
    throw NumericalError("lp_solve: simplex ended with status " + lp::to_string(sol.status),
                         {});
  }

  LpResult out;
  out.objective = sol.objective;
  out.basis = sol.basis;
  out.pivots = sol.pivots;
  out.eta = OccupationMeasure(K, N, U);
  out.stop = SpaceTimeMeasure(K, N);
  for (std::size_t k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < N; ++i) {
      double alive = sol.x[s_var(k, i)];
      out.stop.at(k, i) = sol.x[s_var(k, i)];
      if (k < K)
        for (std::size_t u = 0; u < U; ++u) {
          out.eta.continuing(k, i, u) = sol.x[c_var(k, i, u)];
          alive += sol.x[c_var(k, i, u)];
        }
      out.eta.alive(k, i) = alive;
    }
  out.value = ValueField(K, N);
  for (std::size_t k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < N; ++i) out.value(k, i) = -sol.duals[k * N + i];
  out.psi = Potential{lat.fingerprint(), std::vector<double>(N), false};
  for (std::size_t i = 0; i < N; ++i) out.psi.values[i] = sol.duals[(K + 1) * N + i];

  for (std::size_t i = 0; i < N; ++i)
    out.dual_objective += out.psi[i] * problem.nu()[i] - out.value(0, i) * problem.mu()[i];
  return out;
}

ValueField enumerate_policies(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                              const Potential& psi) {
  require_same_lattice(kernel, psi);
  const auto& lat = kernel.lattice();
  const std::size_t K = lat.steps();
  const std::size_t N = lat.num_nodes();
  const std::size_t U = kernel.controls().size();
  const std::size_t slots = K * N;

  double count = std::pow(static_cast<double>(U + 1), static_cast<double>(slots));
  if (count > static_cast<double>(kMaxPolicies)) {
    std::ostringstream msg;
    msg << "enumerate_policies refuses " << count << " policies (limit " << kMaxPolicies << ")";
    throw DomainError(msg.str());
  }
  const CostTable costs(kernel, lagrangian);

  ValueField best(K, N);
  for (std::size_t k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < N; ++i) best(k, i) = k == K ? psi[i] : -INFINITY;

  // action[slot] == U means stop, otherwise the control index.
  std::vector<std::size_t> action(slots, 0);
  ValueField v(K, N);
  for (std::size_t i = 0; i < N; ++i) v(K, i) = psi[i];
  while (true) {
    for (std::size_t k = K; k-- > 0;)
      for (std::size_t i = 0; i < N; ++i) {
        const std::size_t a = action[k * N + i];
        if (a == U) {
          v(k, i) = psi[i];
        } else {
          double s = 0.0;
          for (const auto& e : kernel.row(i, a)) s += e.prob * v(k + 1, e.target);
          v(k, i) = s - costs.step_cost(k, i, a);
        }
        best(k, i) = std::max(best(k, i), v(k, i));
      }
    std::size_t pos = 0;
    while (pos < slots && ++action[pos] > U) action[pos++] = 0;
    if (pos == slots) break;
  }
  return best;
}

}  // namespace freestop::oracle
