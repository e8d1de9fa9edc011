#include "freestop/transport.hpp"

#include <algorithm>
#include <cmath>

#include "freestop/error.hpp"

namespace freestop {

bool OccupationMeasure::is_zero() const noexcept {
  return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
}

void OccupationMeasure::accumulate(const OccupationMeasure& other, double weight) {
  if (other.steps_ != steps_ || other.nodes_ != nodes_ || other.controls_ != controls_)
    throw StructuralError("occupation measures have different shapes");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += weight * other.c_[i];
  for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += weight * other.m_[i];
}

void StoppingDistribution::accumulate(const StoppingDistribution& other, double weight) {
  auto& a = rho_;
  const auto& b = other.rho_;
  if (a.steps() != b.steps() || a.nodes() != b.nodes())
    throw StructuralError("stopping distributions have different shapes");
  for (std::size_t k = 0; k <= a.steps(); ++k)
    for (std::size_t i = 0; i < a.nodes(); ++i) a.at(k, i) += weight * b.at(k, i);
}

ForwardResult forward_propagate(const TransitionKernel& kernel, const Policy& policy,
                                const GridMeasure& mu) {
  const auto& lat = kernel.lattice();
  const std::size_t K = lat.steps();
  const std::size_t N = lat.num_nodes();
  const std::size_t U = kernel.controls().size();
  if (policy.steps() != K || policy.nodes() != N)
    throw StructuralError("policy and kernel are defined on different lattices");
  if (mu.size() != N || mu.lattice_ref() != lat.fingerprint())
    throw StructuralError("initial measure is defined on a different lattice");

  ForwardResult out{OccupationMeasure(K, N, U), StoppingDistribution(K, N)};
  auto& eta = out.eta;
  auto& rho = out.rho.joint();
  for (std::size_t i = 0; i < N; ++i) eta.alive(0, i) = mu[i];

  const double initial = mu.total();
  double stopped = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      const double m = eta.alive(k, i);
      if (m == 0.0) continue;
      if (policy.stops(k, i)) {
        rho.at(k, i) += m;
        stopped += m;
        continue;
      }
      const std::size_t u = policy.control(k, i);
      eta.continuing(k, i, u) = m;
      for (const auto& e : kernel.row(i, u)) eta.alive(k + 1, e.target) += e.prob * m;
      out.boundary_mass += m * kernel.folded_mass(i, u);
    }
    double alive = 0.0;
    for (std::size_t i = 0; i < N; ++i) alive += eta.alive(k + 1, i);
    out.max_conservation_error =
        std::max(out.max_conservation_error, std::abs(alive + stopped - initial));
  }
  for (std::size_t i = 0; i < N; ++i) {
    rho.at(K, i) += eta.alive(K, i);
    out.terminal_mass += eta.alive(K, i);
  }
  return out;
}

double primal_cost(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                   const OccupationMeasure& eta) {
  return primal_cost(CostTable(kernel, lagrangian), eta);
}

double primal_cost(const CostTable& costs, const OccupationMeasure& eta) {
  double total = 0.0;
  for (std::size_t k = 0; k < eta.steps(); ++k)
    for (std::size_t i = 0; i < eta.nodes(); ++i)
      for (std::size_t u = 0; u < eta.controls(); ++u) {
        const double c = eta.continuing(k, i, u);
        if (c != 0.0) total += costs.step_cost(k, i, u) * c;
      }
  return total;
}

double moment_bound_constant(const Lattice& lattice, const ControlSet& controls,
                             const LagrangianSpec& lagrangian) {
  const double d = static_cast<double>(lattice.dim());
  const double sd = std::sqrt(d);
  const double umax = controls.max_norm();
  return (d + lattice.h() * sd * umax + 2.0 * sd * lattice.radius() * umax) /
         lagrangian.coercivity.c;
}

MomentBoundReport check_moment_bound(const Lattice& lattice, const ControlSet& controls,
                                     const GridMeasure& mu, const StoppingDistribution& rho,
                                     double cost, const LagrangianSpec& lagrangian) {
  MomentBoundReport rep;
  const auto marg = rho.marginal();
  for (std::size_t i = 0; i < lattice.num_nodes(); ++i) {
    const double r2 = lattice.coordinate(i).norm_sq();
    rep.lhs += r2 * marg[i];
    rep.base += r2 * mu[i];
  }
  rep.constant = moment_bound_constant(lattice, controls, lagrangian);
  rep.rhs = rep.base + rep.constant * cost;
  rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-12) + 1e-14;
  return rep;
}

double dirichlet_energy(const Lattice& lattice, const OccupationMeasure& eta) {
  const std::size_t N = lattice.num_nodes();
  const double h = lattice.h();
  const double cell = std::pow(h, static_cast<double>(lattice.dim()));
  double energy = 0.0;
  for (std::size_t k = 0; k <= eta.steps(); ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      auto idx = lattice.multi_index(i);
      for (std::size_t j = 0; j < lattice.dim(); ++j) {
        if (idx[j] + 1 >= lattice.nodes_per_axis()) continue;
        auto nb = idx;
        nb[j] += 1;
        const double g = (eta.alive(k, lattice.flat_index(nb)) - eta.alive(k, i)) / (cell * h);
        energy += lattice.dt() * g * g * cell;
      }
    }
  }
  return energy;
}

}  // namespace freestop
