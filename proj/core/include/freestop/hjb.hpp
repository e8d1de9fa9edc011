#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "freestop/lattice.hpp"
#include "freestop/model.hpp"

namespace freestop {

/// Absolute tolerance under which stopping and continuing count as tied.
/// Ties resolve to Stop.
inline constexpr double kTieTolerance = 1e-12;

/// End potential psi, one value per spatial node.
struct Potential {
  std::uint64_t lattice_ref = 0;
  std::vector<double> values;
  bool normalized = false;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const noexcept { return values[i]; }
  double sup_norm() const noexcept;
};

/// J(k, x) for k = 0..steps.
class ValueField {
 public:
  ValueField() = default;
  ValueField(std::size_t steps, std::size_t nodes)
      : steps_(steps), nodes_(nodes), v_((steps + 1) * nodes, 0.0) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return nodes_; }
  double operator()(std::size_t k, std::size_t i) const noexcept { return v_[k * nodes_ + i]; }
  double& operator()(std::size_t k, std::size_t i) noexcept { return v_[k * nodes_ + i]; }
  std::span<const double> slice(std::size_t k) const noexcept {
    return std::span<const double>(v_).subspan(k * nodes_, nodes_);
  }
  std::span<double> slice(std::size_t k) noexcept {
    return std::span<double>(v_).subspan(k * nodes_, nodes_);
  }

 private:
  std::size_t steps_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> v_;
};

/// Stop / Continue(u) per (k, x). Row k = steps is all Stop.
class Policy {
 public:
  static constexpr std::int32_t kStop = -1;

  Policy() = default;
  Policy(std::size_t steps, std::size_t nodes)
      : steps_(steps), nodes_(nodes), a_((steps + 1) * nodes, kStop) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return nodes_; }
  bool stops(std::size_t k, std::size_t i) const noexcept { return a_[k * nodes_ + i] == kStop; }
  /// Control index; only meaningful when !stops(k, i).
  std::size_t control(std::size_t k, std::size_t i) const noexcept {
    return static_cast<std::size_t>(a_[k * nodes_ + i]);
  }
  std::int32_t action(std::size_t k, std::size_t i) const noexcept { return a_[k * nodes_ + i]; }
  void set_stop(std::size_t k, std::size_t i) noexcept { a_[k * nodes_ + i] = kStop; }
  void set_continue(std::size_t k, std::size_t i, std::size_t control) noexcept {
    a_[k * nodes_ + i] = static_cast<std::int32_t>(control);
  }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::size_t steps_ = 0;
  std::size_t nodes_ = 0;
  std::vector<std::int32_t> a_;
};

struct QviSolution {
  ValueField value;
  Policy policy;
};

/// Running cost L(t_k, x, u) * dt for every (k < steps, node, control), and
/// the time-frozen envelope Lbar(x, u) * dt used by the stationary operator.
class CostTable {
 public:
  CostTable() = default;
  CostTable(const TransitionKernel& kernel, const LagrangianSpec& lagrangian);

  std::size_t steps() const noexcept { return steps_; }
  double step_cost(std::size_t k, std::size_t i, std::size_t u) const noexcept {
    return step_[(k * nodes_ + i) * controls_ + u];
  }
  double frozen_cost(std::size_t i, std::size_t u) const noexcept {
    return frozen_[i * controls_ + u];
  }

 private:
  std::size_t steps_ = 0;
  std::size_t nodes_ = 0;
  std::size_t controls_ = 0;
  std::vector<double> step_;
  std::vector<double> frozen_;
};

/// Backward recursion for min{J - psi, -dJ/dt - 1/2 Lap J - H} = 0 on the
/// chain: J[K] = psi and
///   J[k][x] = max(psi[x], max_u { -L(t_k,x,u) dt + sum_y P(y|x,u) J[k+1][y] }).
/// The policy stops iff psi[x] >= continuation - kTieTolerance.
QviSolution solve_qvi(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                      const Potential& psi);
QviSolution solve_qvi(const TransitionKernel& kernel, const CostTable& costs,
                      const Potential& psi);

/// Space-time stop set {(k,x) : J[k][x] - psi[x] <= kTieTolerance}, stored as
/// a (steps+1) x nodes mask.
class BarrierMask {
 public:
  BarrierMask() = default;
  BarrierMask(std::size_t steps, std::size_t nodes)
      : steps_(steps), nodes_(nodes), m_((steps + 1) * nodes, 0) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return nodes_; }
  bool contains(std::size_t k, std::size_t i) const noexcept { return m_[k * nodes_ + i] != 0; }
  void insert(std::size_t k, std::size_t i) noexcept { m_[k * nodes_ + i] = 1; }
  std::size_t count() const noexcept;

  friend bool operator==(const BarrierMask&, const BarrierMask&) = default;

 private:
  std::size_t steps_ = 0;
  std::size_t nodes_ = 0;
  std::vector<std::uint8_t> m_;
};

BarrierMask extract_barrier(const ValueField& value, const Potential& psi);

struct NormalizeOptions {
  std::size_t max_iter = 1'000'000;
  double tolerance = 1e-12;  ///< sup-norm change that counts as a fixpoint
};

/// Stationary optimal stopping value with the time-frozen cost
/// Lbar(x,u) = sup_t L(t,x,u):
///   V <- max(psi, max_u { -Lbar dt + sum_y P V(y) })
/// iterated to a fixpoint. Throws NumericalError on non-convergence.
Potential normalize_potential(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                              const Potential& psi, const NormalizeOptions& options = {});

struct SupersolutionReport {
  std::vector<double> residual;        ///< per node
  double max_residual = 0.0;
  std::vector<std::size_t> violations;  ///< nodes with residual > tolerance
  double tolerance = 0.0;
};

/// r(x) = max_u { -Lbar(x,u) dt + sum_y P(y|x,u) psi(y) } - psi(x).
SupersolutionReport check_supersolution(const TransitionKernel& kernel,
                                        const LagrangianSpec& lagrangian,
                                        const Potential& psi, double tolerance = 1e-10);

struct HolderReport {
  double delta = 1.0;
  double B = 0.0;
  double E = 0.0;
  bool within_theorem_regime = true;
  std::string label;
};

/// Empirical constants for psi(x0) - psi(x1) <= B|x1-x0|^delta + E|x1-x0|^2
/// over all node pairs. E is scanned over {0} and 10^-6..10^3 (four points
/// per decade); B is the smallest admissible value for that E; the pair with
/// the smallest B + E is reported (smaller E on ties). Diagnostic only.
HolderReport holder_diagnostic(const Lattice& lattice, const Potential& psi, double delta,
                               double drift_power);

/// Throws StructuralError unless psi lives on the kernel's lattice.
void require_same_lattice(const TransitionKernel& kernel, const Potential& psi);

}  // namespace freestop
