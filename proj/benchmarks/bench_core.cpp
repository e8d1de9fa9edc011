#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "freestop/dualsolve.hpp"
#include "freestop/montecarlo.hpp"
#include "freestop/oracle.hpp"

namespace {

using namespace freestop;

// Box [-2, 2]^d with `per_axis` nodes per axis, dt at half the CFL limit,
// Gaussian mu (sd 0.3) and nu (sd 0.6) supported off the boundary.
ProblemConfig gaussian_config(std::size_t dim, std::size_t per_axis, std::size_t steps) {
  ProblemConfig cfg;
  const double radius = 2.0;
  const double h = 2.0 * radius / static_cast<double>(per_axis - 1);
  cfg.controls = ControlSet::uniform(dim, 5, 1.0);
  const double dt =
      0.5 / (static_cast<double>(dim) / (h * h) + cfg.controls.max_norm1() / h);
  cfg.grid = GridSpec{dim, h, dt, dt * static_cast<double>(steps), radius};
  cfg.lagrangian.a_0 = 1.0;
  cfg.lagrangian.coercivity = {0.5, 4.0};
  const Lattice lat = build_lattice(cfg.grid);
  auto gaussian = [&](double sd) {
    std::vector<double> w(lat.num_nodes(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < lat.num_nodes(); ++i) {
      if (lat.on_boundary(i)) continue;
      total += (w[i] = std::exp(-lat.coordinate(i).norm_sq() / (2.0 * sd * sd)));
    }
    for (auto& v : w) v /= total;
    return GridMeasure(lat.fingerprint(), w);
  };
  cfg.mu = gaussian(0.3);
  cfg.nu = gaussian(0.6);
  return cfg;
}

Potential bowl(const Lattice& lat) {
  Potential psi{lat.fingerprint(), std::vector<double>(lat.num_nodes()), false};
  for (std::size_t i = 0; i < lat.num_nodes(); ++i) psi.values[i] = lat.coordinate(i).norm_sq();
  return psi;
}

void BM_SolveQvi(benchmark::State& state) {
  const Problem pb(gaussian_config(static_cast<std::size_t>(state.range(0)),
                                   static_cast<std::size_t>(state.range(1)), 40));
  const CostTable costs(pb.kernel(), pb.lagrangian());
  const auto psi = bowl(pb.lattice());
  for (auto _ : state) benchmark::DoNotOptimize(solve_qvi(pb.kernel(), costs, psi));
  state.counters["nodes"] = static_cast<double>(pb.lattice().num_nodes());
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(pb.lattice().num_nodes() * 40));
}
BENCHMARK(BM_SolveQvi)->Args({1, 41})->Args({1, 161})->Args({2, 21})->Args({2, 41});

void BM_ForwardPropagate(benchmark::State& state) {
  const Problem pb(gaussian_config(static_cast<std::size_t>(state.range(0)),
                                   static_cast<std::size_t>(state.range(1)), 40));
  const auto sol = solve_qvi(pb.kernel(), pb.lagrangian(), bowl(pb.lattice()));
  for (auto _ : state)
    benchmark::DoNotOptimize(forward_propagate(pb.kernel(), sol.policy, pb.mu()));
  state.counters["nodes"] = static_cast<double>(pb.lattice().num_nodes());
}
BENCHMARK(BM_ForwardPropagate)->Args({1, 41})->Args({1, 161})->Args({2, 21})->Args({2, 41});

void BM_LpSolve(benchmark::State& state) {
  const Problem pb(gaussian_config(1, static_cast<std::size_t>(state.range(0)), 8));
  for (auto _ : state) benchmark::DoNotOptimize(oracle::lp_solve(pb));
  state.counters["variables"] = static_cast<double>(oracle::lp_variable_count(pb));
}
BENCHMARK(BM_LpSolve)->Arg(9)->Arg(17)->Unit(benchmark::kMillisecond);

void BM_Ascend(benchmark::State& state) {
  const Problem pb(gaussian_config(1, static_cast<std::size_t>(state.range(0)), 40));
  std::size_t iterations = 0;
  for (auto _ : state) {
    const auto r = ascend(pb, zero_potential(pb));
    iterations = r.report.iterations;
    benchmark::DoNotOptimize(r.report.dual_value);
  }
  state.counters["ascent_iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_Ascend)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const Problem pb(gaussian_config(1, 21, 40));
  const auto psi = bowl(pb.lattice());
  const auto sol = solve_qvi(pb.kernel(), pb.lagrangian(), psi);
  SimulationOptions opt;
  opt.n = static_cast<std::size_t>(state.range(0));
  opt.threads = static_cast<std::size_t>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        simulate(pb.kernel(), pb.lagrangian(), sol.policy, sol.value, psi, pb.mu(), opt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)
    ->Args({100000, 1})
    ->Args({100000, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
