#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "freestop/hjb.hpp"
#include "freestop/lattice.hpp"
#include "freestop/model.hpp"

namespace freestop {

/// Continuing mass c[k][x][u] for k < steps and alive mass m[k][x] for
/// k <= steps.
class OccupationMeasure {
 public:
  OccupationMeasure() = default;
  OccupationMeasure(std::size_t steps, std::size_t nodes, std::size_t controls)
      : steps_(steps),
        nodes_(nodes),
        controls_(controls),
        c_(steps * nodes * controls, 0.0),
        m_((steps + 1) * nodes, 0.0) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t controls() const noexcept { return controls_; }

  double continuing(std::size_t k, std::size_t i, std::size_t u) const noexcept {
    return c_[(k * nodes_ + i) * controls_ + u];
  }
  double& continuing(std::size_t k, std::size_t i, std::size_t u) noexcept {
    return c_[(k * nodes_ + i) * controls_ + u];
  }
  double alive(std::size_t k, std::size_t i) const noexcept { return m_[k * nodes_ + i]; }
  double& alive(std::size_t k, std::size_t i) noexcept { return m_[k * nodes_ + i]; }
  std::span<const double> alive_slice(std::size_t k) const noexcept {
    return std::span<const double>(m_).subspan(k * nodes_, nodes_);
  }

  bool is_zero() const noexcept;
  /// this += weight * other (same shape).
  void accumulate(const OccupationMeasure& other, double weight);

 private:
  std::size_t steps_ = 0;
  std::size_t nodes_ = 0;
  std::size_t controls_ = 0;
  std::vector<double> c_;
  std::vector<double> m_;
};

/// Joint law of (stopping step, stopped node).
class StoppingDistribution {
 public:
  StoppingDistribution() = default;
  StoppingDistribution(std::size_t steps, std::size_t nodes) : rho_(steps, nodes) {}

  const SpaceTimeMeasure& joint() const noexcept { return rho_; }
  SpaceTimeMeasure& joint() noexcept { return rho_; }
  double at(std::size_t k, std::size_t i) const noexcept { return rho_.at(k, i); }
  double total() const noexcept { return rho_.total(); }
  std::vector<double> marginal() const { return rho_.spatial_marginal(); }
  void accumulate(const StoppingDistribution& other, double weight);

 private:
  SpaceTimeMeasure rho_;
};

struct ForwardResult {
  OccupationMeasure eta;
  StoppingDistribution rho;
  /// max over k of |alive(k) + stopped before k - 1|
  double max_conservation_error = 0.0;
  /// continuing mass times the probability folded back at the box boundary
  double boundary_mass = 0.0;
  /// mass still alive at the last step (forced to stop by the horizon)
  double terminal_mass = 0.0;
};

/// Pushes mu forward under `policy`: stopping nodes deposit their alive mass
/// into rho, continuing nodes move it with the kernel row of their control;
/// whatever is alive at the last step stops there.
ForwardResult forward_propagate(const TransitionKernel& kernel, const Policy& policy,
                                const GridMeasure& mu);

/// sum_{k,x,u} L(t_k, x, u) dt c[k][x][u].
double primal_cost(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                   const OccupationMeasure& eta);
double primal_cost(const CostTable& costs, const OccupationMeasure& eta);

struct MomentBoundReport {
  double lhs = 0.0;         ///< sum |y|^2 rho
  double base = 0.0;        ///< sum |x|^2 mu
  double constant = 0.0;    ///< explicit C in lhs <= base + C * cost
  double rhs = 0.0;
  bool pass = false;
};

/// Explicit constant for the second-moment bound on this chain. One step
/// raises E|X|^2 by at most dt * (d + h|u|_1 + 2 x.u) and L >= c, so
/// C = (d + h sqrt(d) umax + 2 sqrt(d) R umax) / c works on the box.
double moment_bound_constant(const Lattice& lattice, const ControlSet& controls,
                             const LagrangianSpec& lagrangian);

MomentBoundReport check_moment_bound(const Lattice& lattice, const ControlSet& controls,
                                     const GridMeasure& mu, const StoppingDistribution& rho,
                                     double cost, const LagrangianSpec& lagrangian);

/// Discrete Dirichlet energy sum_k dt sum_edges ((m_y - m_x) / h)^2 / h^d of
/// the alive density. Logged as a diagnostic only.
double dirichlet_energy(const Lattice& lattice, const OccupationMeasure& eta);

}  // namespace freestop
