#include "freestop/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "freestop/error.hpp"

namespace freestop {

namespace {

constexpr double kRelativeTie = 1e-12;

void require_finite(const Point& v, const char* what) {
  if (!v.is_finite()) throw DomainError(std::string("non-finite ") + what);
}

double spatial_part(const LagrangianSpec& spec, const Point& x) {
  double s = spec.a_0;
  if (spec.a_x != 0.0) s += spec.a_x * std::pow(x.norm(), spec.q);
  return s;
}

double drift_part(const LagrangianSpec& spec, const Point& u) {
  switch (spec.kind) {
    case LagrangianKind::PowerLaw:
      return spec.a_u == 0.0 ? 0.0 : spec.a_u * std::pow(u.norm(), spec.p);
    case LagrangianKind::BoundedControl: {
      const double r = u.norm();
      if (r > *spec.u_bound * (1.0 + kRelativeTie) + kRelativeTie) {
        std::ostringstream msg;
        msg << "control |u| = " << r << " outside the admissible ball of radius "
            << *spec.u_bound;
        throw DomainError(msg.str());
      }
      return spec.a_u == 0.0 ? 0.0 : spec.a_u * std::pow(r, spec.p);
    }
    case LagrangianKind::Tabulated: {
      const auto& tab = spec.table;
      for (std::size_t i = 0; i < tab.controls.size(); ++i) {
        if (tab.controls[i].dim() != u.dim()) continue;
        if ((tab.controls[i] - u).norm_inf() <= 1e-12) return tab.values[i];
      }
      throw DomainError("control not present in the tabulated drift cost");
    }
  }
  return 0.0;
}

// sup_{0 <= r <= r_max} [r s - A r^p] for s >= 0, A > 0, p > 1.
double radial_conjugate(double s, double A, double p, double r_max) {
  double r = std::pow(s / (A * p), 1.0 / (p - 1.0));
  r = std::min(r, r_max);
  return r * s - A * std::pow(r, p);
}

}  // namespace

double TimeProfile::operator()(double t) const noexcept {
  switch (kind) {
    case TimeProfileKind::Constant:
      return 1.0;
    case TimeProfileKind::StrictlyIncreasing:
      return 1.0 + rate * t;
    case TimeProfileKind::StrictlyDecreasing:
      return 1.0 / (1.0 + rate * t);
  }
  return 1.0;
}

double TimeProfile::sup_over(double horizon) const noexcept {
  return std::max((*this)(0.0), (*this)(horizon));
}

void LagrangianSpec::validate() const {
  std::vector<std::string> problems;
  auto fail = [&](std::string s) { problems.push_back(std::move(s)); };

  if (kind == LagrangianKind::PowerLaw && !(p > 1.0)) fail("lagrangian.p must be > 1");
  if (kind == LagrangianKind::BoundedControl && a_u > 0.0 && !(p > 1.0))
    fail("lagrangian.p must be > 1 when a_u > 0");
  if (!(q >= 1.0)) fail("lagrangian.q must be >= 1");
  if (!(a_u >= 0.0) || !(a_x >= 0.0) || !(a_0 >= 0.0))
    fail("lagrangian coefficients a_u, a_x, a_0 must be nonnegative");
  if (kind == LagrangianKind::BoundedControl && (!u_bound || !(*u_bound >= 0.0)))
    fail("lagrangian.u_bound (>= 0) is required for bounded_control");
  if (kind == LagrangianKind::Tabulated) {
    if (table.controls.empty()) fail("lagrangian.table must list at least one control");
    if (table.controls.size() != table.values.size())
      fail("lagrangian.table controls and values differ in length");
    for (double v : table.values)
      if (!(v >= 0.0) || !std::isfinite(v)) {
        fail("lagrangian.table values must be finite and nonnegative");
        break;
      }
  }
  if (!(coercivity.c > 0.0) || !(coercivity.C >= coercivity.c))
    fail("lagrangian coercivity requires 0 < c <= C");
  if (profile.kind != TimeProfileKind::Constant && !(profile.rate > 0.0))
    fail("lagrangian.time_profile rate must be > 0 for a monotone profile");

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid lagrangian:";
    for (const auto& s : problems) msg << "\n  - " << s;
    throw ConfigError(msg.str());
  }
}

ControlSet ControlSet::from_points(std::vector<Point> points) {
  if (points.empty()) throw ConfigError("control set is empty");
  const std::size_t d = points.front().dim();
  for (const auto& u : points) {
    if (u.dim() != d) throw ConfigError("control set mixes dimensions");
    if (!u.is_finite()) throw ConfigError("control set contains a non-finite drift");
  }
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    const double na = a.norm_sq(), nb = b.norm_sq();
    if (na != nb) return na < nb;
    return lex_compare(a, b) < 0;
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  ControlSet set;
  set.points_ = std::move(points);
  return set;
}

ControlSet ControlSet::uniform(std::size_t dim, std::size_t per_axis, double max_abs,
                               std::optional<double> radius) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("control dimension must be 1, 2 or 3");
  if (per_axis < 1) throw ConfigError("controls.per_axis must be >= 1");
  if (!(max_abs >= 0.0)) throw ConfigError("controls.max must be >= 0");
  std::vector<double> axis(per_axis, 0.0);
  if (per_axis > 1) {
    for (std::size_t i = 0; i < per_axis; ++i)
      axis[i] = -max_abs + 2.0 * max_abs * static_cast<double>(i) /
                               static_cast<double>(per_axis - 1);
    // Symmetric grids with an odd count contain the exact origin.
    if (per_axis % 2 == 1) axis[per_axis / 2] = 0.0;
  }
  std::vector<Point> pts;
  std::size_t total = 1;
  for (std::size_t j = 0; j < dim; ++j) total *= per_axis;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point u(dim);
    std::size_t rem = flat;
    for (std::size_t j = 0; j < dim; ++j) {
      u[dim - 1 - j] = axis[rem % per_axis];
      rem /= per_axis;
    }
    if (radius && u.norm() > *radius * (1.0 + kRelativeTie)) continue;
    pts.push_back(u);
  }
  return from_points(std::move(pts));
}

double ControlSet::max_norm() const noexcept {
  double m = 0.0;
  for (const auto& u : points_) m = std::max(m, u.norm());
  return m;
}

double ControlSet::max_norm1() const noexcept {
  double m = 0.0;
  for (const auto& u : points_) m = std::max(m, u.norm1());
  return m;
}

std::optional<std::size_t> ControlSet::find(const Point& u, double tol) const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].dim() == u.dim() && (points_[i] - u).norm_inf() <= tol) return i;
  return std::nullopt;
}

bool strictly_better(double candidate, double incumbent) noexcept {
  const double scale = std::max({1.0, std::abs(candidate), std::abs(incumbent)});
  return candidate > incumbent + kRelativeTie * scale;
}

double eval_lagrangian(const LagrangianSpec& spec, double t, const Point& x, const Point& u) {
  if (!std::isfinite(t)) throw DomainError("non-finite time");
  if (t < 0.0) throw DomainError("negative time");
  require_finite(x, "position");
  require_finite(u, "control");
  return spec.profile(t) * (drift_part(spec, u) + spatial_part(spec, x));
}

double eval_lagrangian_sup(const LagrangianSpec& spec, double horizon, const Point& x,
                           const Point& u) {
  require_finite(x, "position");
  require_finite(u, "control");
  return spec.profile.sup_over(horizon) * (drift_part(spec, u) + spatial_part(spec, x));
}

double hamiltonian_on_grid(const LagrangianSpec& spec, double t, const Point& x,
                           const Point& z, const ControlSet& controls) {
  if (controls.empty()) throw DomainError("empty control grid");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& u : controls.points())
    best = std::max(best, dot(z, u) - eval_lagrangian(spec, t, x, u));
  return best;
}

HamiltonianValue hamiltonian(const LagrangianSpec& spec, double t, const Point& x,
                             const Point& z, const ControlSet* controls) {
  if (!std::isfinite(t) || t < 0.0) throw DomainError("invalid time");
  require_finite(x, "position");
  require_finite(z, "covector");

  const double g = spec.profile(t);
  const double base = g * spatial_part(spec, x);
  const double s = z.norm();
  const double A = g * spec.a_u;

  switch (spec.kind) {
    case LagrangianKind::PowerLaw:
      if (A > 0.0) {
        const double inf = std::numeric_limits<double>::infinity();
        return {radial_conjugate(s, A, spec.p, inf) - base, HamiltonianMode::ClosedForm};
      }
      break;
    case LagrangianKind::BoundedControl: {
      const double ub = *spec.u_bound;
      const double v = A > 0.0 ? radial_conjugate(s, A, spec.p, ub) : ub * s;
      return {v - base, HamiltonianMode::ClosedForm};
    }
    case LagrangianKind::Tabulated:
      break;
  }
  if (controls == nullptr)
    throw DomainError("Hamiltonian has no closed form here; a control grid is required");
  return {hamiltonian_on_grid(spec, t, x, z, *controls), HamiltonianMode::ControlGrid};
}

std::size_t argmax_control(const LagrangianSpec& spec, double t, const Point& x,
                           const Point& z, const ControlSet& controls) {
  if (controls.empty()) throw DomainError("empty control grid");
  std::size_t best = 0;
  double best_val = dot(z, controls[0]) - eval_lagrangian(spec, t, x, controls[0]);
  for (std::size_t i = 1; i < controls.size(); ++i) {
    const double v = dot(z, controls[i]) - eval_lagrangian(spec, t, x, controls[i]);
    if (strictly_better(v, best_val)) {
      best = i;
      best_val = v;
    }
  }
  return best;
}

GridMeasure::GridMeasure(std::uint64_t lattice_ref, std::vector<double> weights)
    : lattice_ref_(lattice_ref), weights_(std::move(weights)) {
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ConfigError("measure weights must be finite and nonnegative");
  }
  total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (total_ > 1.0 + 1e-12) throw ConfigError("measure total mass exceeds 1");
}

bool GridMeasure::is_probability(double tol) const noexcept {
  return std::abs(total_ - 1.0) <= tol;
}

double SpaceTimeMeasure::total() const noexcept {
  return std::accumulate(w_.begin(), w_.end(), 0.0);
}

std::vector<double> SpaceTimeMeasure::spatial_marginal() const {
  std::vector<double> out(nodes_, 0.0);
  for (std::size_t k = 0; k <= steps_; ++k)
    for (std::size_t i = 0; i < nodes_; ++i) out[i] += at(k, i);
  return out;
}

std::string to_string(LagrangianKind kind) {
  switch (kind) {
    case LagrangianKind::PowerLaw: return "power_law";
    case LagrangianKind::BoundedControl: return "bounded_control";
    case LagrangianKind::Tabulated: return "tabulated";
  }
  return "?";
}

std::string to_string(TimeProfileKind kind) {
  switch (kind) {
    case TimeProfileKind::Constant: return "constant";
    case TimeProfileKind::StrictlyIncreasing: return "increasing";
    case TimeProfileKind::StrictlyDecreasing: return "decreasing";
  }
  return "?";
}

std::string to_string(HamiltonianMode mode) {
  return mode == HamiltonianMode::ClosedForm ? "closed_form" : "control_grid";
}

}  // namespace freestop
