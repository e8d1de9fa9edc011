#include "freestop/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <sstream>

#include "freestop/error.hpp"

namespace freestop {

namespace {

constexpr double kStepTolerance = 1e-9;
constexpr double kCflSlack = 1e-12;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

std::uint64_t bits(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

std::size_t checked_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double n = std::round(r);
  if (!(std::abs(r - n) <= kStepTolerance) || n < 0.0) {
    std::ostringstream msg;
    msg << what << " = " << r << " is not an integer (within " << kStepTolerance << ")";
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

Lattice build_lattice(const GridSpec& spec) {
  if (spec.dim < 1 || spec.dim > kMaxDim)
    throw ConfigError("grid.d must be 1, 2 or 3");
  if (!(spec.h > 0.0) || !(spec.dt > 0.0) || !(spec.horizon > 0.0) || !(spec.radius > 0.0))
    throw ConfigError("grid.h, grid.dt, grid.T and grid.R must be positive");

  Lattice lat;
  lat.dim_ = spec.dim;
  lat.h_ = spec.h;
  lat.dt_ = spec.dt;
  lat.horizon_ = spec.horizon;
  lat.steps_ = checked_ratio(spec.horizon, spec.dt, "T/dt");
  if (lat.steps_ < 1) throw ConfigError("grid.T/grid.dt must be at least 1");
  const std::size_t half = checked_ratio(spec.radius, spec.h, "R/h");
  if (half < 1) throw ConfigError("grid.R/grid.h must be at least 1");
  lat.per_axis_ = 2 * half + 1;
  lat.radius_ = spec.h * static_cast<double>(half);
  lat.num_nodes_ = 1;
  for (std::size_t j = 0; j < spec.dim; ++j) lat.num_nodes_ *= lat.per_axis_;

  std::uint64_t fp = 0x66726565ULL;
  fp = mix(fp, lat.dim_);
  fp = mix(fp, bits(lat.h_));
  fp = mix(fp, bits(lat.dt_));
  fp = mix(fp, lat.steps_);
  fp = mix(fp, lat.per_axis_);
  lat.fingerprint_ = fp;
  return lat;
}

std::array<std::size_t, kMaxDim> Lattice::multi_index(std::size_t node) const noexcept {
  std::array<std::size_t, kMaxDim> idx{};
  for (std::size_t j = dim_; j-- > 0;) {
    idx[j] = node % per_axis_;
    node /= per_axis_;
  }
  return idx;
}

std::size_t Lattice::flat_index(const std::array<std::size_t, kMaxDim>& idx) const noexcept {
  std::size_t node = 0;
  for (std::size_t j = 0; j < dim_; ++j) node = node * per_axis_ + idx[j];
  return node;
}

Point Lattice::coordinate(std::size_t node) const noexcept {
  const auto idx = multi_index(node);
  const auto half = static_cast<std::ptrdiff_t>(per_axis_ / 2);
  Point x(dim_);
  for (std::size_t j = 0; j < dim_; ++j)
    x[j] = h_ * static_cast<double>(static_cast<std::ptrdiff_t>(idx[j]) - half);
  return x;
}

bool Lattice::on_boundary(std::size_t node) const noexcept {
  const auto idx = multi_index(node);
  for (std::size_t j = 0; j < dim_; ++j)
    if (idx[j] == 0 || idx[j] + 1 == per_axis_) return true;
  return false;
}

std::optional<std::size_t> Lattice::locate(const Point& x, double tol) const {
  if (x.dim() != dim_) return std::nullopt;
  std::array<std::size_t, kMaxDim> idx{};
  const double half = static_cast<double>(per_axis_ / 2);
  for (std::size_t j = 0; j < dim_; ++j) {
    const double r = x[j] / h_ + half;
    const double n = std::round(r);
    if (std::abs(r - n) * h_ > tol || n < 0.0 || n >= static_cast<double>(per_axis_))
      return std::nullopt;
    idx[j] = static_cast<std::size_t>(n);
  }
  return flat_index(idx);
}

std::size_t Lattice::nearest(const Point& x) const noexcept {
  std::array<std::size_t, kMaxDim> idx{};
  const double half = static_cast<double>(per_axis_ / 2);
  const double top = static_cast<double>(per_axis_ - 1);
  for (std::size_t j = 0; j < dim_; ++j) {
    const double n = std::clamp(std::round(x[j] / h_ + half), 0.0, top);
    idx[j] = static_cast<std::size_t>(n);
  }
  return flat_index(idx);
}

double cfl_number(const Lattice& lattice, const ControlSet& controls) noexcept {
  const double h = lattice.h();
  return lattice.dt() *
         (static_cast<double>(lattice.dim()) / (h * h) + controls.max_norm1() / h);
}

TransitionKernel build_kernel(const Lattice& lattice, const ControlSet& controls) {
  if (controls.empty()) throw ConfigError("control grid is empty");
  if (controls.dim() != lattice.dim())
    throw ConfigError("control dimension does not match grid.d");
  const double h = lattice.h();
  const double dt = lattice.dt();
  const std::size_t d = lattice.dim();

  for (const auto& u : controls.points()) {
    const double cfl = dt * (static_cast<double>(d) / (h * h) + u.norm1() / h);
    if (cfl > 1.0 + kCflSlack) {
      std::ostringstream msg;
      msg << "CFL violation: dt*(d/h^2 + |u|_1/h) = " << cfl << " > 1 for h = " << h
          << ", dt = " << dt << ", u = (";
      for (std::size_t j = 0; j < d; ++j) msg << (j ? ", " : "") << u[j];
      msg << "); largest admissible dt is "
          << 1.0 / (static_cast<double>(d) / (h * h) + controls.max_norm1() / h);
      throw ConfigError(msg.str());
    }
  }

  TransitionKernel k;
  k.lattice_ = lattice;
  k.controls_ = controls;
  const std::size_t nodes = lattice.num_nodes();
  const std::size_t nu = controls.size();
  const std::size_t n_axis = lattice.nodes_per_axis();
  k.offsets_.reserve(nodes * nu + 1);
  k.entries_.reserve(nodes * nu * (2 * d + 1));
  k.folded_.assign(nodes * nu, 0.0);
  k.offsets_.push_back(0);

  const double diffusive = 1.0 / (2.0 * h * h);
  for (std::size_t node = 0; node < nodes; ++node) {
    const auto idx = lattice.multi_index(node);
    for (std::size_t c = 0; c < nu; ++c) {
      const Point& u = controls[c];
      const std::size_t self_pos = k.entries_.size();
      k.entries_.push_back({static_cast<std::uint32_t>(node), 0.0});
      double outflow = 0.0;
      double folded = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double up = dt * (diffusive + std::max(u[j], 0.0) / h);
        const double down = dt * (diffusive + std::max(-u[j], 0.0) / h);
        auto neighbor = idx;
        if (idx[j] > 0) {
          neighbor[j] = idx[j] - 1;
          k.entries_.push_back({static_cast<std::uint32_t>(lattice.flat_index(neighbor)), down});
          outflow += down;
        } else {
          folded += down;
        }
        if (idx[j] + 1 < n_axis) {
          neighbor[j] = idx[j] + 1;
          k.entries_.push_back({static_cast<std::uint32_t>(lattice.flat_index(neighbor)), up});
          outflow += up;
        } else {
          folded += up;
        }
      }
      k.entries_[self_pos].prob = 1.0 - outflow;
      k.folded_[node * nu + c] = folded;
      k.offsets_.push_back(k.entries_.size());
    }
  }
  return k;
}

void write_kernel(std::ostream& out, const TransitionKernel& kernel) {
  const auto old_prec = out.precision(17);
  out << "node,control,neighbor,probability\n";
  const std::size_t nodes = kernel.lattice().num_nodes();
  for (std::size_t node = 0; node < nodes; ++node)
    for (std::size_t c = 0; c < kernel.controls().size(); ++c)
      for (const auto& e : kernel.row(node, c))
        out << node << ',' << c << ',' << e.target << ',' << e.prob << '\n';
  out.precision(old_prec);
}

}  // namespace freestop
