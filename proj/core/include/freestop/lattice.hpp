#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "freestop/model.hpp"
#include "freestop/point.hpp"

namespace freestop {

struct GridSpec {
  std::size_t dim = 1;
  double h = 1.0;        ///< spatial step
  double dt = 0.5;       ///< time step
  double horizon = 1.0;  ///< T
  double radius = 1.0;   ///< R, box [-R, R]^d
};

/// Space-time grid on [0,T] x [-R,R]^d. Nodes are numbered lexicographically
/// by coordinates with axis 0 most significant.
class Lattice {
 public:
  Lattice() = default;

  std::size_t dim() const noexcept { return dim_; }
  double h() const noexcept { return h_; }
  double dt() const noexcept { return dt_; }
  double radius() const noexcept { return radius_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes_per_axis() const noexcept { return per_axis_; }
  std::size_t num_nodes() const noexcept { return num_nodes_; }
  double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }

  std::array<std::size_t, kMaxDim> multi_index(std::size_t node) const noexcept;
  std::size_t flat_index(const std::array<std::size_t, kMaxDim>& idx) const noexcept;
  Point coordinate(std::size_t node) const noexcept;
  bool on_boundary(std::size_t node) const noexcept;
  /// Node whose coordinate matches `x` within `tol` per axis, if any.
  std::optional<std::size_t> locate(const Point& x, double tol = 1e-9) const;
  /// Nearest node after clamping `x` into the box.
  std::size_t nearest(const Point& x) const noexcept;

  /// Identifies the grid geometry; measures and potentials carry it.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  friend Lattice build_lattice(const GridSpec& spec);

 private:
  std::size_t dim_ = 1;
  double h_ = 1.0;
  double dt_ = 1.0;
  double radius_ = 0.0;
  double horizon_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t per_axis_ = 1;
  std::size_t num_nodes_ = 1;
  std::uint64_t fingerprint_ = 0;
};

/// Validates step consistency (T/dt and R/h integral within 1e-9) and
/// returns the lattice. Throws ConfigError otherwise.
Lattice build_lattice(const GridSpec& spec);

struct KernelEntry {
  std::uint32_t target;
  double prob;
};

/// Controlled Markov chain on the lattice whose one-step moments match the
/// generator 1/2 Laplacian + u.grad with an upwind split of the drift.
/// Mass that would leave the box is folded back onto the departing node.
class TransitionKernel {
 public:
  const Lattice& lattice() const noexcept { return lattice_; }
  const ControlSet& controls() const noexcept { return controls_; }

  std::span<const KernelEntry> row(std::size_t node, std::size_t control) const noexcept {
    const std::size_t r = node * controls_.size() + control;
    return std::span<const KernelEntry>(entries_).subspan(offsets_[r],
                                                          offsets_[r + 1] - offsets_[r]);
  }
  bool clipped(std::size_t node, std::size_t control) const noexcept {
    return folded_[node * controls_.size() + control] > 0.0;
  }
  /// Probability mass folded back onto the node for this row.
  double folded_mass(std::size_t node, std::size_t control) const noexcept {
    return folded_[node * controls_.size() + control];
  }

  friend TransitionKernel build_kernel(const Lattice& lattice, const ControlSet& controls);

 private:
  Lattice lattice_;
  ControlSet controls_;
  std::vector<KernelEntry> entries_;
  std::vector<std::size_t> offsets_;
  std::vector<double> folded_;
};

/// dt * (d / h^2 + max |u|_1 / h); must not exceed 1.
double cfl_number(const Lattice& lattice, const ControlSet& controls) noexcept;

/// Throws ConfigError naming (h, dt, u) when the CFL bound is violated.
TransitionKernel build_kernel(const Lattice& lattice, const ControlSet& controls);

/// Sparse text dump: header line then `node,control,neighbor,probability`.
void write_kernel(std::ostream& out, const TransitionKernel& kernel);

}  // namespace freestop
