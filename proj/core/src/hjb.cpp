#include "freestop/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "freestop/error.hpp"

namespace freestop {

namespace {

double expect(std::span<const KernelEntry> row, std::span<const double> next) noexcept {
  double s = 0.0;
  for (const auto& e : row) s += e.prob * next[e.target];
  return s;
}

// Best one-step continuation from node i, using `cost(u)` as the step cost.
// Returns (value, control); controls are scanned in tie-break order.
template <typename CostFn>
std::pair<double, std::size_t> best_continuation(const TransitionKernel& kernel, std::size_t i,
                                                 std::span<const double> next, CostFn&& cost) {
  const std::size_t nu = kernel.controls().size();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t u = 0; u < nu; ++u) {
    const double v = expect(kernel.row(i, u), next) - cost(u);
    if (u == 0 || strictly_better(v, best)) {
      best = v;
      arg = u;
    }
  }
  return {best, arg};
}

}  // namespace

double Potential::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void require_same_lattice(const TransitionKernel& kernel, const Potential& psi) {
  const auto& lat = kernel.lattice();
  if (psi.lattice_ref != lat.fingerprint() || psi.size() != lat.num_nodes())
    throw StructuralError("potential and kernel are defined on different lattices");
  for (double v : psi.values)
    if (!std::isfinite(v)) throw DomainError("potential has non-finite values");
}

CostTable::CostTable(const TransitionKernel& kernel, const LagrangianSpec& lagrangian)
    : steps_(kernel.lattice().steps()),
      nodes_(kernel.lattice().num_nodes()),
      controls_(kernel.controls().size()),
      step_(steps_ * nodes_ * controls_),
      frozen_(nodes_ * controls_) {
  const auto& lat = kernel.lattice();
  const double dt = lat.dt();
  for (std::size_t i = 0; i < nodes_; ++i) {
    const Point x = lat.coordinate(i);
    for (std::size_t u = 0; u < controls_; ++u) {
      const Point& ctrl = kernel.controls()[u];
      for (std::size_t k = 0; k < steps_; ++k)
        step_[(k * nodes_ + i) * controls_ + u] =
            eval_lagrangian(lagrangian, lat.time(k), x, ctrl) * dt;
      frozen_[i * controls_ + u] = eval_lagrangian_sup(lagrangian, lat.horizon(), x, ctrl) * dt;
    }
  }
}

QviSolution solve_qvi(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                      const Potential& psi) {
  require_same_lattice(kernel, psi);
  return solve_qvi(kernel, CostTable(kernel, lagrangian), psi);
}

QviSolution solve_qvi(const TransitionKernel& kernel, const CostTable& costs,
                      const Potential& psi) {
  require_same_lattice(kernel, psi);
  const auto& lat = kernel.lattice();
  const std::size_t K = lat.steps();
  const std::size_t N = lat.num_nodes();
  if (costs.steps() != K) throw StructuralError("cost table built for another lattice");

  QviSolution sol{ValueField(K, N), Policy(K, N)};
  std::copy(psi.values.begin(), psi.values.end(), sol.value.slice(K).begin());

  for (std::size_t k = K; k-- > 0;) {
    const auto next = sol.value.slice(k + 1);
    auto cur = sol.value.slice(k);
    for (std::size_t i = 0; i < N; ++i) {
      const auto [cont, u] = best_continuation(
          kernel, i, next, [&](std::size_t c) { return costs.step_cost(k, i, c); });
      cur[i] = std::max(psi[i], cont);
      if (psi[i] >= cont - kTieTolerance)
        sol.policy.set_stop(k, i);
      else
        sol.policy.set_continue(k, i, u);
    }
  }
  return sol;
}

std::size_t BarrierMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(m_.begin(), m_.end(), std::uint8_t{1}));
}

BarrierMask extract_barrier(const ValueField& value, const Potential& psi) {
  if (psi.size() != value.nodes())
    throw StructuralError("value field and potential sizes differ");
  BarrierMask mask(value.steps(), value.nodes());
  for (std::size_t k = 0; k <= value.steps(); ++k)
    for (std::size_t i = 0; i < value.nodes(); ++i)
      if (k == value.steps() || value(k, i) - psi[i] <= kTieTolerance) mask.insert(k, i);
  return mask;
}

Potential normalize_potential(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                              const Potential& psi, const NormalizeOptions& options) {
  require_same_lattice(kernel, psi);
  const std::size_t N = kernel.lattice().num_nodes();
  const CostTable costs(kernel, lagrangian);

  std::vector<double> v = psi.values;
  std::vector<double> next(N);
  double change = 0.0;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    change = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const auto [cont, u] = best_continuation(
          kernel, i, v, [&](std::size_t c) { return costs.frozen_cost(i, c); });
      (void)u;
      next[i] = std::max(psi[i], cont);
      change = std::max(change, std::abs(next[i] - v[i]));
    }
    v.swap(next);
    if (change < options.tolerance) {
      Potential out{psi.lattice_ref, std::move(v), true};
      return out;
    }
  }
  std::ostringstream msg;
  msg << "normalize_potential did not reach a fixpoint after " << options.max_iter
      << " sweeps; last sup-norm change " << change;
  throw NumericalError(msg.str(), {{0.0, change}});
}

SupersolutionReport check_supersolution(const TransitionKernel& kernel,
                                        const LagrangianSpec& lagrangian,
                                        const Potential& psi, double tolerance) {
  require_same_lattice(kernel, psi);
  const std::size_t N = kernel.lattice().num_nodes();
  const CostTable costs(kernel, lagrangian);

  SupersolutionReport rep;
  rep.tolerance = tolerance;
  rep.residual.resize(N);
  rep.max_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) {
    const auto [cont, u] = best_continuation(
        kernel, i, psi.values, [&](std::size_t c) { return costs.frozen_cost(i, c); });
    (void)u;
    rep.residual[i] = cont - psi[i];
    rep.max_residual = std::max(rep.max_residual, rep.residual[i]);
    if (rep.residual[i] > tolerance) rep.violations.push_back(i);
  }
  return rep;
}

HolderReport holder_diagnostic(const Lattice& lattice, const Potential& psi, double delta,
                               double drift_power) {
  if (psi.size() != lattice.num_nodes())
    throw StructuralError("potential is not defined on this lattice");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("Hoelder exponent must lie in (0, 1]");

  HolderReport rep;
  rep.delta = delta;
  if (lattice.dim() == 1)
    rep.within_theorem_regime = delta == 1.0;
  else
    rep.within_theorem_regime = delta <= 2.0 - drift_power;
  rep.label = rep.within_theorem_regime ? "within theorem regime" : "outside theorem regime";

  std::vector<double> scan{0.0};
  for (int e = -24; e <= 12; ++e) scan.push_back(std::pow(10.0, e / 4.0));

  const std::size_t N = lattice.num_nodes();
  std::vector<Point> coords(N);
  for (std::size_t i = 0; i < N; ++i) coords[i] = lattice.coordinate(i);

  double best_sum = std::numeric_limits<double>::infinity();
  for (double E : scan) {
    double B = 0.0;
    for (std::size_t a = 0; a < N; ++a) {
      for (std::size_t b = a + 1; b < N; ++b) {
        const double r = (coords[a] - coords[b]).norm();
        const double diff = std::abs(psi[a] - psi[b]);
        const double need = (diff - E * r * r) / std::pow(r, delta);
        B = std::max(B, need);
      }
    }
    if (B + E < best_sum) {
      best_sum = B + E;
      rep.B = B;
      rep.E = E;
    }
  }
  return rep;
}

}  // namespace freestop
