#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "freestop/lattice.hpp"
#include "freestop/model.hpp"

namespace freestop {

struct Tolerances {
  double eps_gap = 1e-6;       ///< relative duality gap accepted as converged
  double eps_marginal = 1e-4;  ///< L1 distance between stopped marginal and target
  double eps_mass = 1e-3;      ///< boundary / terminal mass flag threshold
};

enum class StepRule { InverseSqrt, Fixed, Polyak };

struct AscentParams {
  double step0 = 1.0;
  StepRule rule = StepRule::Polyak;
  std::size_t max_iter = 10000;
  std::size_t norm_every = 0;  ///< 0 disables periodic re-normalization
};

struct MonteCarloParams {
  std::size_t n = 100000;
  std::uint64_t seed = 1;
};

struct ProblemConfig {
  LagrangianSpec lagrangian;
  GridSpec grid;
  ControlSet controls;
  GridMeasure mu;
  GridMeasure nu;
  Tolerances tolerances;
  AscentParams ascent;
  MonteCarloParams mc;
};

/// Every invariant violation of `config`, one actionable line each. Empty
/// when the configuration is valid.
std::vector<std::string> validation_errors(const ProblemConfig& config);

/// A validated configuration together with its lattice and kernel.
class Problem {
 public:
  /// Throws ConfigError carrying all validation failures.
  explicit Problem(ProblemConfig config);

  const ProblemConfig& config() const noexcept { return config_; }
  const Lattice& lattice() const noexcept { return kernel_.lattice(); }
  const TransitionKernel& kernel() const noexcept { return kernel_; }
  const LagrangianSpec& lagrangian() const noexcept { return config_.lagrangian; }
  const ControlSet& controls() const noexcept { return kernel_.controls(); }
  const GridMeasure& mu() const noexcept { return config_.mu; }
  const GridMeasure& nu() const noexcept { return config_.nu; }

 private:
  ProblemConfig config_;
  TransitionKernel kernel_;
};

std::string to_string(StepRule rule);

}  // namespace freestop
