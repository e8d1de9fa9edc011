#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace freestop::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 1,
  kNotConverged = 2,
  kInfeasible = 3,
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::filesystem::path> psi;     ///< hjb, diag
  std::optional<std::filesystem::path> policy;  ///< forward
  std::optional<std::size_t> n;                 ///< mc, overrides mc.n
  std::optional<std::uint64_t> seed;            ///< mc, overrides mc.seed
  std::size_t trace = 0;                        ///< mc, paths written to mc_paths.csv
  std::optional<double> delta;                  ///< diag, Holder exponent
};

/// Each command prints a short summary to `log`, writes its CSV artifacts
/// under options.out and returns an ExitCode. Library errors are mapped to
/// exit codes by run_guarded.
int run_solve(const CommandOptions& options, std::ostream& log);
int run_hjb(const CommandOptions& options, std::ostream& log);
int run_forward(const CommandOptions& options, std::ostream& log);
int run_oracle(const CommandOptions& options, std::ostream& log);
int run_mc(const CommandOptions& options, std::ostream& log);
int run_diag(const CommandOptions& options, std::ostream& log);

using Command = int (*)(const CommandOptions&, std::ostream&);

/// Runs `command`, printing any freestop::Error to `err` and returning its
/// exit code (configuration, domain and structural errors give 1, numerical
/// failures 2, infeasibility 3).
int run_guarded(Command command, const CommandOptions& options, std::ostream& log,
                std::ostream& err);

}  // namespace freestop::cli
