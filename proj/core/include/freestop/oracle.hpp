#pragma once

#include <cstddef>
#include <vector>

#include "freestop/hjb.hpp"
#include "freestop/problem.hpp"
#include "freestop/transport.hpp"

namespace freestop::oracle {

inline constexpr std::size_t kMaxLpVariables = 2000;
inline constexpr std::size_t kMaxPolicies = 1'000'000;

struct LpResult {
  double objective = 0.0;       ///< sum L dt c at the optimum
  double dual_objective = 0.0;  ///< sum psi nu - sum J[0] mu of the multipliers
  OccupationMeasure eta;        ///< c[k][x][u] and the induced alive mass m[k][x]
  SpaceTimeMeasure stop;        ///< s[k][x]
  ValueField value;             ///< J[k][x] = -(flow-row multiplier)
  Potential psi;                ///< marginal-row multipliers
  std::vector<std::size_t> basis;
  std::size_t pivots = 0;
};

/// Exact linear program over discrete occupation measures with explicit
/// stop-mass variables:
///   min sum L(t_k,x,u) dt c[k][x][u]
///   s.t. sum_u c[0][x][u] + s[0][x] = mu[x]
///        sum_u c[k][x][u] + s[k][x] = sum_{x',u} P(x|x',u) c[k-1][x'][u]
///        sum_k s[k][x] = nu[x],   c, s >= 0,   c[K] = 0.
/// Throws InfeasibleError carrying a Farkas certificate (one multiplier per
/// row, flow rows first) when nu cannot be reached, and DomainError when the
/// instance exceeds kMaxLpVariables.
LpResult lp_solve(const Problem& problem);

/// Number of LP variables lp_solve would create.
std::size_t lp_variable_count(const Problem& problem);

/// Maximum over every deterministic Markov stopping rule of
/// E[psi(X_tau) - sum L dt], evaluated node by node by policy evaluation.
/// Throws DomainError when more than kMaxPolicies rules would be visited.
ValueField enumerate_policies(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                              const Potential& psi);

}  // namespace freestop::oracle
