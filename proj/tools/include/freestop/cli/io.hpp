#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "freestop/dualsolve.hpp"
#include "freestop/hjb.hpp"
#include "freestop/lattice.hpp"
#include "freestop/montecarlo.hpp"
#include "freestop/transport.hpp"

namespace freestop::cli {

/// Numeric rows of a CSV file. A first line that does not parse as numbers
/// is treated as a header and skipped. Throws ConfigError naming the file
/// and line on malformed input.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path);

/// Weights on `lattice` from rows "x_1,...,x_d,weight". Rows whose
/// coordinates are not lattice nodes are reported in `errors` with `key`.
GridMeasure read_measure(const std::filesystem::path& path, const Lattice& lattice,
                         const std::string& key, std::vector<std::string>& errors);

/// Potential from rows "x_1,...,x_d,psi" covering every node.
Potential read_potential(const std::filesystem::path& path, const Lattice& lattice);

/// Policy from rows "k,x_1,...,x_d,action" (action -1 = stop, otherwise the
/// control index). Missing rows default to stop.
Policy read_policy(const std::filesystem::path& path, const Lattice& lattice);

/// Shortest round-trip text for doubles (17 significant digits).
std::string format_double(double v);

void write_potential(std::ostream& out, const Lattice& lattice, const Potential& psi);
void write_value(std::ostream& out, const Lattice& lattice, const ValueField& value);
void write_barrier(std::ostream& out, const Lattice& lattice, const BarrierMask& barrier);
void write_policy(std::ostream& out, const Lattice& lattice, const Policy& policy);
void write_alive_mass(std::ostream& out, const Lattice& lattice, const OccupationMeasure& eta);
void write_stopping(std::ostream& out, const Lattice& lattice, const StoppingDistribution& rho);
void write_history(std::ostream& out, const std::vector<HistoryEntry>& history);

using KeyValues = std::vector<std::pair<std::string, std::string>>;
void write_key_values(std::ostream& out, const KeyValues& rows);
KeyValues report_rows(const SolveReport& report);

void write_distribution_report(std::ostream& out, const Lattice& lattice,
                               const StoppingDistribution& rho, const DistributionReport& rep);
void write_martingale_report(std::ostream& out, const MartingaleReport& rep);
/// First `count` paths of the batch.
void write_path_trace(std::ostream& out, const PathBatch& batch, std::size_t count);

/// Opens `dir / name` for writing, creating `dir` when needed.
void write_file(const std::filesystem::path& dir, const std::string& name,
                const std::function<void(std::ostream&)>& body);

}  // namespace freestop::cli
