#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "freestop/hjb.hpp"
#include "freestop/lattice.hpp"
#include "freestop/model.hpp"
#include "freestop/transport.hpp"

namespace freestop {

/// How J(t, X_t) is read off the lattice when recording M_t.
enum class FieldLookup { NearestNode, Multilinear };

struct SimulationOptions {
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  /// Time steps at which M_t is recorded; empty means 0, K/4, K/2, 3K/4, K.
  std::vector<std::size_t> checkpoints;
  FieldLookup lookup = FieldLookup::Multilinear;
  std::size_t shard_size = 8192;
  /// 0 picks std::thread::hardware_concurrency().
  std::size_t threads = 0;
};

/// Euler-Maruyama paths of dX = u*(t, X) dt + dW stopped on first entry into
/// the policy's stop set. Control and stop decisions use the nearest node.
struct PathBatch {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t dim = 1;
  std::vector<std::size_t> checkpoints;
  std::vector<std::uint32_t> stop_step;
  std::vector<std::uint32_t> stop_node;
  std::vector<double> stop_location;  ///< n x dim
  std::vector<double> running_cost;
  /// n x checkpoints: M_{t_c ^ tau} = J(t, X_t) - accumulated cost.
  std::vector<double> martingale;
  /// n x checkpoints: nearest node at the checkpoint while still alive, or
  /// kStopped once the path has stopped.
  std::vector<std::uint32_t> checkpoint_node;

  static constexpr std::uint32_t kStopped = 0xffffffffu;

  double martingale_at(std::size_t path, std::size_t c) const noexcept {
    return martingale[path * checkpoints.size() + c];
  }
};

PathBatch simulate(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                   const Policy& policy, const ValueField& value, const Potential& psi,
                   const GridMeasure& mu, const SimulationOptions& options);

/// Discrepancy allowances between the Gaussian simulation and the chain,
/// both of order sqrt(dt) + h.
struct Allowance {
  double distribution = 0.0;
  double cost = 0.0;
};

Allowance discretization_allowance(const Lattice& lattice, const LagrangianSpec& lagrangian,
                                   const ControlSet& controls);

struct DistributionReport {
  double distance = 0.0;  ///< L1 between the empirical stop histogram and rho_marg
  double bound = 0.0;     ///< 3 (sqrt(bins / n) + allowance)
  double allowance = 0.0;
  std::size_t bins = 0;
  bool low_power = false;  ///< bound >= 2, the largest possible L1 distance
  bool pass = false;
  std::vector<double> empirical;
  std::vector<double> z_scores;
};

DistributionReport verify_distribution(const PathBatch& batch, const StoppingDistribution& rho,
                                       double allowance);

struct IncrementStat {
  std::size_t from = 0;  ///< checkpoint step s
  std::size_t to = 0;    ///< checkpoint step t
  double mean = 0.0;
  double std_error = 0.0;
  double lower = 0.0;  ///< 99% interval
  double upper = 0.0;
  bool contains_zero = false;
};

struct MartingaleReport {
  std::vector<IncrementStat> increments;
  bool two_sided_pass = false;  ///< every interval contains 0
  bool one_sided_pass = false;  ///< every interval has lower edge <= 0
  bool pass = false;
};

/// 99% intervals for E[M_{t^tau} - M_{s^tau}] over consecutive checkpoints.
MartingaleReport martingale_test(const PathBatch& batch);

struct CostReport {
  double mean = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  double allowance = 0.0;
  bool pass = false;
};

/// |mean running cost - reference| <= 3 std_error + allowance.
CostReport cost_check(const PathBatch& batch, double reference, double allowance);

/// Paths whose recorded pre-stop checkpoint node lies in `barrier`.
std::size_t first_hit_violations(const PathBatch& batch, const BarrierMask& barrier);

}  // namespace freestop
