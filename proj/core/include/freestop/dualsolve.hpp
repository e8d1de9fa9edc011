#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "freestop/hjb.hpp"
#include "freestop/problem.hpp"
#include "freestop/transport.hpp"

namespace freestop {

struct HistoryEntry {
  std::size_t iteration = 0;
  double dual_value = 0.0;
  double residual = 0.0;
  double gap_adj = 0.0;
};

struct SolveReport {
  double dual_value = 0.0;         ///< best dual value seen
  double marginal_residual = 0.0;  ///< |rho_marg - nu|_1 of the returned pair
  std::size_t iterations = 0;
  bool converged = false;
  double primal_cost = 0.0;
  double gap = 0.0;      ///< primal_cost - dual_value
  double gap_adj = 0.0;  ///< gap + |psi|_inf * marginal_residual, >= 0
  /// Cost of the best mixture of visited stopping rules; an upper bound on
  /// the optimum once its residual vanishes.
  double upper_bound = 0.0;
  std::size_t mixture_size = 0;  ///< stopping rules with positive weight
  std::size_t pool_size = 0;     ///< distinct stopping rules visited
  double boundary_mass = 0.0;
  double terminal_mass = 0.0;
  /// (k < steps, x) where stopping and the best continuation tie within 1e-9.
  std::size_t tied_nodes = 0;
  std::vector<std::string> flags;
  std::vector<HistoryEntry> history;
};

struct SolveResult {
  Potential psi;
  ValueField value;
  Policy policy;
  OccupationMeasure eta;
  StoppingDistribution rho;
  SolveReport report;
};

/// sum psi * nu - sum J[0] * mu.
double dual_value(const Potential& psi, const ValueField& value, const GridMeasure& mu,
                  const GridMeasure& nu);

/// |rho_marg - nu|_1.
double marginal_residual(const StoppingDistribution& rho, const GridMeasure& nu);

struct GapReport {
  double gap = 0.0;
  double gap_adj = 0.0;
};

GapReport duality_gap(double primal_cost, double dual_value, double psi_sup_norm,
                      double marginal_residual);

/// psi minus its mu-weighted mean.
Potential gauge_fixed(const Potential& psi, const GridMeasure& mu);

Potential zero_potential(const Problem& problem);

/// Projected supergradient ascent on the concave dual
///   D(psi) = sum psi nu - sum J_psi[0] mu,  supergradient nu - rho_marg(psi),
/// with a restricted master LP over the visited stopping rules for primal
/// recovery. Converged when the recovered pair has residual <= eps_marginal
/// and its cost is within eps_gap * max(1, |cost|) of the best dual value.
/// Throws NumericalError when the residual stays above ten times its initial
/// value for 100 consecutive iterations.
SolveResult ascend(const Problem& problem, const Potential& psi0);

}  // namespace freestop
