#include "freestop/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>

#include "freestop/cli/io.hpp"
#include "freestop/error.hpp"
#include "json.hpp"

namespace freestop::cli {

namespace {

using nlohmann::json;

std::string canonical(std::string s) {
  std::string out;
  for (char c : s)
    if (c != '_' && c != '-' && c != ' ') out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

std::string type_name(const json& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back(path + ": " + msg);
  }

  const json* section(const json& obj, const std::string& key, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(key, "missing section");
      return nullptr;
    }
    if (!it->is_object()) {
      fail(key, "expected an object, found " + type_name(*it));
      return nullptr;
    }
    return &*it;
  }

  void allow(const json& obj, const std::string& prefix, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const bool known = std::any_of(keys.begin(), keys.end(),
                                     [&](const char* k) { return it.key() == k; });
      if (!known) fail(join(prefix, it.key()), "unknown key");
    }
  }

  const json* find(const json& obj, const std::string& prefix, const char* key, bool required) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) fail(join(prefix, key), "missing key");
      return nullptr;
    }
    return &*it;
  }

  void number(const json& obj, const std::string& prefix, const char* key, double& out,
              bool required) {
    const json* v = find(obj, prefix, key, required);
    if (!v) return;
    if (!v->is_number()) {
      fail(join(prefix, key), "expected a number, found " + type_name(*v));
      return;
    }
    out = v->get<double>();
  }

  template <class Int>
  void integer(const json& obj, const std::string& prefix, const char* key, Int& out,
               bool required) {
    const json* v = find(obj, prefix, key, required);
    if (!v) return;
    if (!v->is_number_integer()) {
      fail(join(prefix, key), "expected an integer, found " + type_name(*v));
      return;
    }
    if (v->is_number_unsigned() || v->get<std::int64_t>() >= 0) {
      out = v->get<Int>();
      return;
    }
    fail(join(prefix, key), "expected a nonnegative integer");
  }

  std::optional<std::string> string(const json& obj, const std::string& prefix, const char* key,
                                    bool required) {
    const json* v = find(obj, prefix, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(join(prefix, key), "expected a string, found " + type_name(*v));
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  static std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  }
};

std::optional<Point> parse_point(Reader& r, const json& v, const std::string& path) {
  if (v.is_number()) return Point{v.get<double>()};
  if (!v.is_array() || v.empty() || v.size() > kMaxDim) {
    r.fail(path, "expected a number or an array of 1 to 3 numbers");
    return std::nullopt;
  }
  Point p(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!v[j].is_number()) {
      r.fail(path, "expected numeric components");
      return std::nullopt;
    }
    p[j] = v[j].get<double>();
  }
  return p;
}

void parse_profile(Reader& r, const json& lag, TimeProfile& profile) {
  const std::string path = "lagrangian.time_profile";
  auto it = lag.find("time_profile");
  if (it == lag.end()) return;
  std::string kind;
  if (it->is_string()) {
    kind = it->get<std::string>();
    profile.rate = 1.0;
  } else if (it->is_object()) {
    r.allow(*it, path, {"kind", "rate"});
    auto k = r.string(*it, path, "kind", true);
    if (!k) return;
    kind = *k;
    profile.rate = 1.0;
    r.number(*it, path, "rate", profile.rate, false);
  } else {
    r.fail(path, "expected a string or an object {kind, rate}, found " + type_name(*it));
    return;
  }
  const std::string c = canonical(kind);
  if (c == "constant") {
    profile.kind = TimeProfileKind::Constant;
  } else if (c == "increasing" || c == "strictlyincreasing") {
    profile.kind = TimeProfileKind::StrictlyIncreasing;
  } else if (c == "decreasing" || c == "strictlydecreasing") {
    profile.kind = TimeProfileKind::StrictlyDecreasing;
  } else {
    r.fail(path, "unknown profile '" + kind + "' (constant, increasing, decreasing)");
  }
}

void parse_lagrangian(Reader& r, const json& root, LagrangianSpec& L) {
  const json* lag = r.section(root, "lagrangian", true);
  if (!lag) return;
  const std::string p = "lagrangian";
  r.allow(*lag, p, {"kind", "p", "q", "a_u", "a_x", "a_0", "time_profile", "u_bound", "c", "C",
                    "table"});
  if (auto kind = r.string(*lag, p, "kind", true)) {
    const std::string c = canonical(*kind);
    if (c == "powerlaw") {
      L.kind = LagrangianKind::PowerLaw;
    } else if (c == "boundedcontrol") {
      L.kind = LagrangianKind::BoundedControl;
    } else if (c == "tabulated") {
      L.kind = LagrangianKind::Tabulated;
    } else {
      r.fail("lagrangian.kind",
             "unknown kind '" + *kind + "' (power_law, bounded_control, tabulated)");
    }
  }
  r.number(*lag, p, "p", L.p, false);
  r.number(*lag, p, "q", L.q, false);
  r.number(*lag, p, "a_u", L.a_u, false);
  r.number(*lag, p, "a_x", L.a_x, false);
  r.number(*lag, p, "a_0", L.a_0, false);
  r.number(*lag, p, "c", L.coercivity.c, false);
  r.number(*lag, p, "C", L.coercivity.C, false);
  double bound = 0.0;
  if (lag->contains("u_bound") && !(*lag)["u_bound"].is_null()) {
    r.number(*lag, p, "u_bound", bound, true);
    L.u_bound = bound;
  }
  parse_profile(r, *lag, L.profile);

  auto it = lag->find("table");
  if (it == lag->end()) return;
  if (!it->is_array()) {
    r.fail("lagrangian.table", "expected an array of {u, value} entries");
    return;
  }
  for (std::size_t e = 0; e < it->size(); ++e) {
    const std::string path = "lagrangian.table[" + std::to_string(e) + "]";
    const json& entry = (*it)[e];
    if (!entry.is_object()) {
      r.fail(path, "expected an object {u, value}");
      continue;
    }
    r.allow(entry, path, {"u", "value"});
    const json* u = r.find(entry, path, "u", true);
    double value = 0.0;
    r.number(entry, path, "value", value, true);
    if (!u) continue;
    if (auto pt = parse_point(r, *u, path + ".u")) {
      L.table.controls.push_back(*pt);
      L.table.values.push_back(value);
    }
  }
}

bool parse_grid(Reader& r, const json& root, GridSpec& g) {
  const json* grid = r.section(root, "grid", true);
  if (!grid) return false;
  const std::size_t before = r.errors.size();
  r.allow(*grid, "grid", {"d", "h", "dt", "T", "R"});
  r.integer(*grid, "grid", "d", g.dim, true);
  r.number(*grid, "grid", "h", g.h, true);
  r.number(*grid, "grid", "dt", g.dt, true);
  r.number(*grid, "grid", "T", g.horizon, true);
  r.number(*grid, "grid", "R", g.radius, true);
  return r.errors.size() == before;
}

void parse_controls(Reader& r, const json& root, const LagrangianSpec& L, std::size_t dim,
                    ControlSet& controls) {
  const bool tabulated = L.kind == LagrangianKind::Tabulated;
  const json* sec = r.section(root, "controls", !tabulated);
  if (!sec) {
    if (tabulated && !L.table.controls.empty()) {
      try {
        controls = ControlSet::from_points(L.table.controls);
      } catch (const Error& e) {
        r.fail("lagrangian.table", e.what());
      }
    }
    return;
  }
  r.allow(*sec, "controls", {"per_axis", "max"});
  std::size_t per_axis = 0;
  double max_abs = 0.0;
  const std::size_t before = r.errors.size();
  r.integer(*sec, "controls", "per_axis", per_axis, true);
  r.number(*sec, "controls", "max", max_abs, true);
  if (r.errors.size() != before) return;
  if (per_axis < 1) r.fail("controls.per_axis", "must be >= 1");
  if (!(max_abs >= 0.0)) r.fail("controls.max", "must be >= 0");
  if (dim < 1 || dim > kMaxDim) return;
  if (per_axis < 1 || !(max_abs >= 0.0)) return;
  std::optional<double> radius;
  if (L.kind == LagrangianKind::BoundedControl) radius = L.u_bound;
  try {
    controls = ControlSet::uniform(dim, per_axis, max_abs, radius);
  } catch (const Error& e) {
    r.fail("controls", e.what());
  }
}

void parse_solver(Reader& r, const json& root, ProblemConfig& cfg) {
  const json* sec = r.section(root, "solver", false);
  if (!sec) return;
  const std::string p = "solver";
  r.allow(*sec, p,
          {"eps_gap", "eps_marginal", "eps_mass", "step0", "step_rule", "max_iter", "norm_every"});
  r.number(*sec, p, "eps_gap", cfg.tolerances.eps_gap, false);
  r.number(*sec, p, "eps_marginal", cfg.tolerances.eps_marginal, false);
  r.number(*sec, p, "eps_mass", cfg.tolerances.eps_mass, false);
  r.number(*sec, p, "step0", cfg.ascent.step0, false);
  r.integer(*sec, p, "max_iter", cfg.ascent.max_iter, false);
  r.integer(*sec, p, "norm_every", cfg.ascent.norm_every, false);
  if (auto rule = r.string(*sec, p, "step_rule", false)) {
    const std::string c = canonical(*rule);
    if (c == "polyak") {
      cfg.ascent.rule = StepRule::Polyak;
    } else if (c == "inversesqrt") {
      cfg.ascent.rule = StepRule::InverseSqrt;
    } else if (c == "fixed") {
      cfg.ascent.rule = StepRule::Fixed;
    } else {
      r.fail("solver.step_rule", "unknown rule '" + *rule + "' (polyak, inverse_sqrt, fixed)");
    }
  }
}

void parse_mc(Reader& r, const json& root, MonteCarloParams& mc) {
  const json* sec = r.section(root, "mc", false);
  if (!sec) return;
  r.allow(*sec, "mc", {"n", "seed"});
  r.integer(*sec, "mc", "n", mc.n, false);
  r.integer(*sec, "mc", "seed", mc.seed, false);
  if (mc.n < 1) r.fail("mc.n", "must be >= 1");
}

void parse_measures(Reader& r, const json& root, const Lattice* lattice,
                    const std::filesystem::path& base, ProblemConfig& cfg) {
  const json* sec = r.section(root, "measures", true);
  if (!sec) return;
  r.allow(*sec, "measures", {"mu_file", "nu_file"});
  auto mu = r.string(*sec, "measures", "mu_file", true);
  auto nu = r.string(*sec, "measures", "nu_file", true);
  if (!lattice) return;
  auto load = [&](const std::optional<std::string>& file, const char* key) -> GridMeasure {
    if (!file) return {};
    std::filesystem::path path(*file);
    if (path.is_relative()) path = base / path;
    try {
      return read_measure(path, *lattice, key, r.errors);
    } catch (const Error& e) {
      r.fail(key, e.what());
      return {};
    }
  };
  cfg.mu = load(mu, "measures.mu_file");
  cfg.nu = load(nu, "measures.nu_file");
}

[[noreturn]] void throw_all(const std::vector<std::string>& errors) {
  std::ostringstream msg;
  msg << "invalid configuration (" << errors.size() << " problem"
      << (errors.size() > 1 ? "s" : "") << "):";
  for (const auto& e : errors) msg << "\n  - " << e;
  throw ConfigError(msg.str());
}

}  // namespace

ProblemConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("configuration must be a JSON object");

  Reader r;
  ProblemConfig cfg;
  r.allow(root, "", {"lagrangian", "grid", "controls", "measures", "solver", "mc"});
  parse_lagrangian(r, root, cfg.lagrangian);
  const bool grid_ok = parse_grid(r, root, cfg.grid);
  parse_controls(r, root, cfg.lagrangian, cfg.grid.dim, cfg.controls);
  parse_solver(r, root, cfg);
  parse_mc(r, root, cfg.mc);

  std::optional<Lattice> lattice;
  if (grid_ok) {
    try {
      lattice = build_lattice(cfg.grid);
    } catch (const ConfigError& e) {
      r.fail("grid", e.what());
    }
  }
  parse_measures(r, root, lattice ? &*lattice : nullptr, base_dir, cfg);

  std::vector<std::string> errors = r.errors;
  if (grid_ok) {
    for (auto& e : validation_errors(cfg)) {
      const bool seen = std::any_of(errors.begin(), errors.end(), [&](const std::string& s) {
        return s == e || s.ends_with(": " + e);
      });
      if (!seen) errors.push_back(std::move(e));
    }
  }
  if (!errors.empty()) throw_all(errors);
  return cfg;
}

ProblemConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.parent_path());
}

}  // namespace freestop::cli
