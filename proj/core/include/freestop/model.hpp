#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freestop/point.hpp"

namespace freestop {

enum class LagrangianKind { PowerLaw, BoundedControl, Tabulated };

enum class TimeProfileKind { Constant, StrictlyIncreasing, StrictlyDecreasing };

/// Positive time weight g(t) multiplying the whole running cost.
///   Constant:           g(t) = 1
///   StrictlyIncreasing: g(t) = 1 + rate * t
///   StrictlyDecreasing: g(t) = 1 / (1 + rate * t)
struct TimeProfile {
  TimeProfileKind kind = TimeProfileKind::Constant;
  double rate = 0.0;

  double operator()(double t) const noexcept;
  /// sup of g over [0, horizon]; attained at an endpoint for these profiles.
  double sup_over(double horizon) const noexcept;
};

struct Coercivity {
  double c = 1.0;
  double C = 1.0;
};

/// Drift cost given pointwise on a finite control set (Tabulated kind).
struct DriftTable {
  std::vector<Point> controls;
  std::vector<double> values;
};

/// Running cost L(t,x,u) = g(t) * (drift(u) + a_x |x|^q + a_0) with
/// drift(u) = a_u |u|^p for PowerLaw and BoundedControl, and the tabulated
/// value for Tabulated. BoundedControl restricts controls to |u| <= u_bound.
struct LagrangianSpec {
  LagrangianKind kind = LagrangianKind::PowerLaw;
  double p = 2.0;
  double q = 1.0;
  double a_u = 0.5;
  double a_x = 0.0;
  double a_0 = 1.0;
  TimeProfile profile{};
  std::optional<double> u_bound;
  Coercivity coercivity{};
  DriftTable table{};

  /// Structural checks on the parameters (exponents, signs, bound presence).
  /// Throws ConfigError listing every violation.
  void validate() const;
};

/// Finite control grid U_h, stored sorted by Euclidean norm then
/// lexicographically. Index order is the tie-break order everywhere.
class ControlSet {
 public:
  ControlSet() = default;
  static ControlSet from_points(std::vector<Point> points);
  /// Tensor grid of `per_axis` equispaced values in [-max_abs, max_abs] per
  /// axis; points with |u| > radius are dropped when a radius is given.
  static ControlSet uniform(std::size_t dim, std::size_t per_axis, double max_abs,
                            std::optional<double> radius = std::nullopt);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  std::size_t dim() const noexcept { return points_.empty() ? 0 : points_.front().dim(); }
  const Point& operator[](std::size_t i) const noexcept { return points_[i]; }
  std::span<const Point> points() const noexcept { return points_; }
  double max_norm() const noexcept;
  double max_norm1() const noexcept;
  std::optional<std::size_t> find(const Point& u, double tol = 1e-12) const;

 private:
  std::vector<Point> points_;
};

/// True when `candidate` beats `incumbent` by more than the relative tie
/// tolerance. Iterating controls in ControlSet order and replacing only on a
/// strict win realizes "smallest norm, then lexicographic" tie-breaking.
bool strictly_better(double candidate, double incumbent) noexcept;

double eval_lagrangian(const LagrangianSpec& spec, double t, const Point& x, const Point& u);

/// Time-frozen upper envelope sup_{t in [0,horizon]} L(t,x,u).
double eval_lagrangian_sup(const LagrangianSpec& spec, double horizon, const Point& x,
                           const Point& u);

enum class HamiltonianMode { ClosedForm, ControlGrid };

struct HamiltonianValue {
  double value = 0.0;
  HamiltonianMode mode = HamiltonianMode::ClosedForm;
};

/// H(t,x,z) = sup_u [z.u - L(t,x,u)]. Uses the exact conjugate over the
/// continuous control set when one exists; otherwise maximizes over
/// `controls` (DomainError when that is needed but no grid is supplied).
HamiltonianValue hamiltonian(const LagrangianSpec& spec, double t, const Point& x,
                             const Point& z, const ControlSet* controls = nullptr);

/// max over the control grid of z.u - L(t,x,u).
double hamiltonian_on_grid(const LagrangianSpec& spec, double t, const Point& x,
                           const Point& z, const ControlSet& controls);

/// Index of the maximizer of z.u - L(t,x,u) over `controls`.
std::size_t argmax_control(const LagrangianSpec& spec, double t, const Point& x,
                           const Point& z, const ControlSet& controls);

/// Nonnegative weights per spatial node of one lattice.
class GridMeasure {
 public:
  GridMeasure() = default;
  GridMeasure(std::uint64_t lattice_ref, std::vector<double> weights);

  std::uint64_t lattice_ref() const noexcept { return lattice_ref_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator[](std::size_t i) const noexcept { return weights_[i]; }
  std::size_t size() const noexcept { return weights_.size(); }
  double total() const noexcept { return total_; }
  bool is_probability(double tol = 1e-12) const noexcept;

 private:
  std::uint64_t lattice_ref_ = 0;
  std::vector<double> weights_;
  double total_ = 0.0;
};

/// Nonnegative weights per (time step k in 0..steps, node).
class SpaceTimeMeasure {
 public:
  SpaceTimeMeasure() = default;
  SpaceTimeMeasure(std::size_t steps, std::size_t nodes)
      : steps_(steps), nodes_(nodes), w_((steps + 1) * nodes, 0.0) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return nodes_; }
  double& at(std::size_t k, std::size_t i) noexcept { return w_[k * nodes_ + i]; }
  double at(std::size_t k, std::size_t i) const noexcept { return w_[k * nodes_ + i]; }
  std::span<const double> slice(std::size_t k) const noexcept {
    return std::span<const double>(w_).subspan(k * nodes_, nodes_);
  }
  std::span<const double> data() const noexcept { return w_; }
  double total() const noexcept;
  /// Sum over time steps: the spatial marginal.
  std::vector<double> spatial_marginal() const;

 private:
  std::size_t steps_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> w_;
};

std::string to_string(LagrangianKind kind);
std::string to_string(TimeProfileKind kind);
std::string to_string(HamiltonianMode mode);

}  // namespace freestop
