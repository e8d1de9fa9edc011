#include "freestop/problem.hpp"

#include <cmath>
#include <sstream>

#include "freestop/error.hpp"

namespace freestop {

namespace {

std::string format_point(const Point& x) {
  std::ostringstream s;
  s << '(';
  for (std::size_t j = 0; j < x.dim(); ++j) s << (j ? ", " : "") << x[j];
  s << ')';
  return s.str();
}

void check_measure(const char* name, const GridMeasure& m, const Lattice& lat,
                   std::vector<std::string>& errors) {
  if (m.size() != lat.num_nodes() || m.lattice_ref() != lat.fingerprint()) {
    errors.push_back(std::string("measures.") + name + " is not defined on the configured grid");
    return;
  }
  if (!m.is_probability(1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "measures." << name << " has total mass " << m.total() << ", expected 1";
    errors.push_back(msg.str());
  }
  std::vector<std::string> offending;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] > 0.0 && lat.on_boundary(i)) offending.push_back(format_point(lat.coordinate(i)));
  if (!offending.empty()) {
    std::ostringstream msg;
    msg << "measures." << name << " has mass on the box boundary |x_j| = R = "
        << lat.radius() << " (support must be strictly inside); offending nodes:";
    for (const auto& s : offending) msg << ' ' << s;
    errors.push_back(msg.str());
  }
}

// The declared coercivity constants must bracket L on the discrete box.
void check_coercivity(const ProblemConfig& cfg, const Lattice& lat,
                      std::vector<std::string>& errors) {
  const auto& L = cfg.lagrangian;
  const double c = L.coercivity.c;
  const double C = L.coercivity.C;
  const bool has_power = L.kind == LagrangianKind::PowerLaw || L.a_u > 0.0;
  int reported = 0;
  for (std::size_t i = 0; i < lat.num_nodes() && reported < 3; ++i) {
    const Point x = lat.coordinate(i);
    for (const auto& u : cfg.controls.points()) {
      const double up = has_power ? std::pow(u.norm(), L.p) : 0.0;
      const double xq = std::pow(x.norm(), L.q);
      for (double t : {0.0, lat.horizon()}) {
        double v;
        try {
          v = eval_lagrangian(L, t, x, u);
        } catch (const Error& e) {
          errors.push_back(std::string("lagrangian: ") + e.what());
          return;
        }
        const double lower = c * (up + 1.0);
        const double upper = C * (up + xq + 1.0);
        if (v < lower * (1.0 - 1e-12) || v > upper * (1.0 + 1e-12)) {
          std::ostringstream msg;
          msg << "lagrangian coercivity (c, C) = (" << c << ", " << C
              << ") does not bracket L = " << v << " at t = " << t << ", x = "
              << format_point(x) << ", u = " << format_point(u) << " (bounds [" << lower
              << ", " << upper << "])";
          errors.push_back(msg.str());
          if (++reported >= 3) return;
          break;
        }
      }
      if (reported >= 3) return;
    }
  }
}

}  // namespace

std::vector<std::string> validation_errors(const ProblemConfig& cfg) {
  std::vector<std::string> errors;
  try {
    cfg.lagrangian.validate();
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
  }

  Lattice lat;
  bool have_lattice = false;
  try {
    lat = build_lattice(cfg.grid);
    have_lattice = true;
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
  }

  if (cfg.controls.empty()) {
    errors.push_back("controls: the control grid is empty");
  } else if (cfg.controls.dim() != cfg.grid.dim) {
    errors.push_back("controls: dimension differs from grid.d");
  } else if (have_lattice) {
    const double cfl = cfl_number(lat, cfg.controls);
    if (cfl > 1.0 + 1e-12) {
      std::ostringstream msg;
      msg << "CFL violation: dt*(d/h^2 + max|u|_1/h) = " << cfl << " > 1 with h = "
          << lat.h() << ", dt = " << lat.dt() << ", max|u|_1 = " << cfg.controls.max_norm1()
          << "; need dt <= "
          << 1.0 / (static_cast<double>(lat.dim()) / (lat.h() * lat.h()) +
                    cfg.controls.max_norm1() / lat.h());
      errors.push_back(msg.str());
    }
  }

  if (have_lattice) {
    check_measure("mu", cfg.mu, lat, errors);
    check_measure("nu", cfg.nu, lat, errors);
    if (errors.empty()) check_coercivity(cfg, lat, errors);
  }

  const auto& tol = cfg.tolerances;
  if (!(tol.eps_gap > 0.0) || !(tol.eps_marginal > 0.0) || !(tol.eps_mass > 0.0))
    errors.push_back("solver.eps_gap, solver.eps_marginal and solver.eps_mass must be > 0");
  if (!(cfg.ascent.step0 > 0.0)) errors.push_back("solver.step0 must be > 0");
  if (cfg.ascent.max_iter < 1) errors.push_back("solver.max_iter must be >= 1");
  return errors;
}

Problem::Problem(ProblemConfig config) : config_(std::move(config)) {
  const auto errors = validation_errors(config_);
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration (" << errors.size() << " problem"
        << (errors.size() > 1 ? "s" : "") << "):";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw ConfigError(msg.str());
  }
  kernel_ = build_kernel(build_lattice(config_.grid), config_.controls);
}

std::string to_string(StepRule rule) {
  switch (rule) {
    case StepRule::InverseSqrt: return "inverse_sqrt";
    case StepRule::Fixed: return "fixed";
    case StepRule::Polyak: return "polyak";
  }
  return "?";
}

}  // namespace freestop
