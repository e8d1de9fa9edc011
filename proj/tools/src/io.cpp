#include "freestop/cli/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "freestop/error.hpp"

namespace freestop::cli {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string field =
        trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                             : comma - start));
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last) return false;
    out.push_back(v);
    if (comma == std::string::npos) return true;
    start = comma + 1;
  }
}

std::string coordinate_header(std::size_t dim) {
  std::string h;
  for (std::size_t j = 0; j < dim; ++j) h += (j ? ",x" : "x") + std::to_string(j + 1);
  return h;
}

void write_coordinates(std::ostream& out, const Point& x) {
  for (std::size_t j = 0; j < x.dim(); ++j) out << (j ? "," : "") << format_double(x[j]);
}

Point row_point(const std::vector<double>& row, std::size_t offset, std::size_t dim) {
  Point p(dim);
  for (std::size_t j = 0; j < dim; ++j) p[j] = row[offset + j];
  return p;
}

std::string describe(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

// Rows paired with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::vector<double>>> read_rows(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  std::string line;
  std::size_t number = 0;
  std::vector<double> row;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    if (!parse_row(line, row)) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError(describe(path, number) + ": expected comma-separated numbers");
    }
    first = false;
    rows.emplace_back(number, row);
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  std::vector<std::vector<double>> out;
  for (auto& [line, row] : read_rows(path)) out.push_back(std::move(row));
  return out;
}

GridMeasure read_measure(const std::filesystem::path& path, const Lattice& lattice,
                         const std::string& key, std::vector<std::string>& errors) {
  const std::size_t d = lattice.dim();
  std::vector<double> w(lattice.num_nodes(), 0.0);
  std::vector<std::string> off_grid;
  for (const auto& [line, row] : read_rows(path)) {
    if (row.size() != d + 1) {
      errors.push_back(key + ": " + describe(path, line) + ": expected " +
                       std::to_string(d + 1) + " columns (coordinates, weight)");
      continue;
    }
    const double weight = row[d];
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      errors.push_back(key + ": " + describe(path, line) + ": weight must be finite and >= 0");
      continue;
    }
    const Point x = row_point(row, 0, d);
    const auto node = lattice.locate(x);
    if (!node) {
      if (weight > 0.0) off_grid.push_back(describe(path, line));
      continue;
    }
    w[*node] += weight;
  }
  if (!off_grid.empty()) {
    std::string msg = key + ": support outside the box or off the lattice (radius " +
                      format_double(lattice.radius()) + ", h " + format_double(lattice.h()) +
                      ") at";
    for (const auto& s : off_grid) msg += " " + s;
    errors.push_back(msg);
  }
  return GridMeasure(lattice.fingerprint(), std::move(w));
}

Potential read_potential(const std::filesystem::path& path, const Lattice& lattice) {
  const std::size_t d = lattice.dim();
  Potential psi;
  psi.lattice_ref = lattice.fingerprint();
  psi.values.assign(lattice.num_nodes(), 0.0);
  std::vector<bool> seen(lattice.num_nodes(), false);
  for (const auto& [line, row] : read_rows(path)) {
    if (row.size() != d + 1)
      throw ConfigError(describe(path, line) + ": expected " + std::to_string(d + 1) +
                        " columns (coordinates, psi)");
    const auto node = lattice.locate(row_point(row, 0, d));
    if (!node) throw ConfigError(describe(path, line) + ": coordinates are not a lattice node");
    if (!std::isfinite(row[d])) throw ConfigError(describe(path, line) + ": psi is not finite");
    psi.values[*node] = row[d];
    seen[*node] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) {
      std::ostringstream msg;
      msg << path.string() << ": no value for node (";
      write_coordinates(msg, lattice.coordinate(i));
      msg << ")";
      throw ConfigError(msg.str());
    }
  return psi;
}

Policy read_policy(const std::filesystem::path& path, const Lattice& lattice) {
  const std::size_t d = lattice.dim();
  Policy policy(lattice.steps(), lattice.num_nodes());
  for (const auto& [line, row] : read_rows(path)) {
    if (row.size() < d + 2)
      throw ConfigError(describe(path, line) + ": expected at least " + std::to_string(d + 2) +
                        " columns (k, coordinates, action)");
    const double k = row[0];
    if (k < 0.0 || k != std::floor(k) || k > static_cast<double>(lattice.steps()))
      throw ConfigError(describe(path, line) + ": step k out of range");
    const auto node = lattice.locate(row_point(row, 1, d));
    if (!node) throw ConfigError(describe(path, line) + ": coordinates are not a lattice node");
    const double a = row[d + 1];
    const auto kk = static_cast<std::size_t>(k);
    if (a == -1.0 || kk == lattice.steps()) {
      policy.set_stop(kk, *node);
      continue;
    }
    if (a < 0.0 || a != std::floor(a))
      throw ConfigError(describe(path, line) + ": action must be -1 (stop) or a control index");
    policy.set_continue(kk, *node, static_cast<std::size_t>(a));
  }
  return policy;
}

void write_potential(std::ostream& out, const Lattice& lattice, const Potential& psi) {
  out << coordinate_header(lattice.dim()) << ",psi\n";
  for (std::size_t i = 0; i < lattice.num_nodes(); ++i) {
    write_coordinates(out, lattice.coordinate(i));
    out << ',' << format_double(psi[i]) << '\n';
  }
}

namespace {

template <class F>
void write_space_time(std::ostream& out, const Lattice& lattice, std::size_t steps,
                      const char* column, F&& value) {
  out << "k,t," << coordinate_header(lattice.dim()) << ',' << column << '\n';
  for (std::size_t k = 0; k <= steps; ++k)
    for (std::size_t i = 0; i < lattice.num_nodes(); ++i) {
      out << k << ',' << format_double(lattice.time(k)) << ',';
      write_coordinates(out, lattice.coordinate(i));
      out << ',' << value(k, i) << '\n';
    }
}

}  // namespace

void write_value(std::ostream& out, const Lattice& lattice, const ValueField& value) {
  write_space_time(out, lattice, value.steps(), "J",
                   [&](std::size_t k, std::size_t i) { return format_double(value(k, i)); });
}

void write_barrier(std::ostream& out, const Lattice& lattice, const BarrierMask& barrier) {
  write_space_time(out, lattice, barrier.steps(), "stop",
                   [&](std::size_t k, std::size_t i) {
                     return barrier.contains(k, i) ? "1" : "0";
                   });
}

void write_policy(std::ostream& out, const Lattice& lattice, const Policy& policy) {
  out << "k," << coordinate_header(lattice.dim()) << ",action\n";
  for (std::size_t k = 0; k <= policy.steps(); ++k)
    for (std::size_t i = 0; i < policy.nodes(); ++i) {
      out << k << ',';
      write_coordinates(out, lattice.coordinate(i));
      out << ',' << policy.action(k, i) << '\n';
    }
}

void write_alive_mass(std::ostream& out, const Lattice& lattice, const OccupationMeasure& eta) {
  write_space_time(out, lattice, eta.steps(), "m",
                   [&](std::size_t k, std::size_t i) { return format_double(eta.alive(k, i)); });
}

void write_stopping(std::ostream& out, const Lattice& lattice, const StoppingDistribution& rho) {
  write_space_time(out, lattice, rho.joint().steps(), "rho",
                   [&](std::size_t k, std::size_t i) { return format_double(rho.at(k, i)); });
}

void write_history(std::ostream& out, const std::vector<HistoryEntry>& history) {
  out << "iteration,dual_value,residual,gap_adj\n";
  for (const auto& h : history)
    out << h.iteration << ',' << format_double(h.dual_value) << ',' << format_double(h.residual)
        << ',' << format_double(h.gap_adj) << '\n';
}

void write_key_values(std::ostream& out, const KeyValues& rows) {
  out << "key,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
}

KeyValues report_rows(const SolveReport& r) {
  std::string flags;
  for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
  return {
      {"converged", r.converged ? "1" : "0"},
      {"iterations", std::to_string(r.iterations)},
      {"dual_value", format_double(r.dual_value)},
      {"primal_cost", format_double(r.primal_cost)},
      {"marginal_residual", format_double(r.marginal_residual)},
      {"gap", format_double(r.gap)},
      {"gap_adj", format_double(r.gap_adj)},
      {"upper_bound", format_double(r.upper_bound)},
      {"mixture_size", std::to_string(r.mixture_size)},
      {"pool_size", std::to_string(r.pool_size)},
      {"boundary_mass", format_double(r.boundary_mass)},
      {"terminal_mass", format_double(r.terminal_mass)},
      {"tied_nodes", std::to_string(r.tied_nodes)},
      {"flags", flags},
  };
}

void write_distribution_report(std::ostream& out, const Lattice& lattice,
                               const StoppingDistribution& rho, const DistributionReport& rep) {
  const auto marg = rho.marginal();
  out << coordinate_header(lattice.dim()) << ",rho_marg,empirical,z_score\n";
  for (std::size_t i = 0; i < lattice.num_nodes(); ++i) {
    write_coordinates(out, lattice.coordinate(i));
    out << ',' << format_double(marg[i]) << ',' << format_double(rep.empirical[i]) << ','
        << format_double(rep.z_scores[i]) << '\n';
  }
}

void write_martingale_report(std::ostream& out, const MartingaleReport& rep) {
  out << "from,to,mean,std_error,lower,upper,contains_zero\n";
  for (const auto& s : rep.increments)
    out << s.from << ',' << s.to << ',' << format_double(s.mean) << ','
        << format_double(s.std_error) << ',' << format_double(s.lower) << ','
        << format_double(s.upper) << ',' << (s.contains_zero ? 1 : 0) << '\n';
}

void write_path_trace(std::ostream& out, const PathBatch& batch, std::size_t count) {
  out << "path,stop_step," << coordinate_header(batch.dim) << ",running_cost";
  for (std::size_t k : batch.checkpoints) out << ",M_" << k;
  out << '\n';
  const std::size_t n = std::min(count, batch.n);
  for (std::size_t p = 0; p < n; ++p) {
    out << p << ',' << batch.stop_step[p];
    for (std::size_t j = 0; j < batch.dim; ++j)
      out << ',' << format_double(batch.stop_location[p * batch.dim + j]);
    out << ',' << format_double(batch.running_cost[p]);
    for (std::size_t c = 0; c < batch.checkpoints.size(); ++c)
      out << ',' << format_double(batch.martingale_at(p, c));
    out << '\n';
  }
}

void write_file(const std::filesystem::path& dir, const std::string& name,
                const std::function<void(std::ostream&)>& body) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  body(out);
  if (!out) throw ConfigError("failed while writing " + path.string());
}

}  // namespace freestop::cli
