#include "freestop/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "freestop/error.hpp"

namespace freestop {

namespace {

constexpr double kZ99 = 2.5758293035489004;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lookup(const Lattice& lat, const ValueField& value, std::size_t k, const Point& x,
              FieldLookup mode) {
  if (mode == FieldLookup::NearestNode) return value(k, lat.nearest(x));
  const std::size_t d = lat.dim();
  const double half = static_cast<double>(lat.nodes_per_axis() / 2);
  const double top = static_cast<double>(lat.nodes_per_axis() - 1);
  std::array<std::size_t, kMaxDim> base{};
  std::array<double, kMaxDim> w{};
  for (std::size_t j = 0; j < d; ++j) {
    const double f = std::clamp(x[j] / lat.h() + half, 0.0, top);
    const double i0 = std::min(std::floor(f), top - 1.0);
    base[j] = static_cast<std::size_t>(i0);
    w[j] = f - i0;
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    auto idx = base;
    double weight = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (corner >> j & 1U) {
        idx[j] += 1;
        weight *= w[j];
      } else {
        weight *= 1.0 - w[j];
      }
    }
    if (weight != 0.0) acc += weight * value(k, lat.flat_index(idx));
  }
  return acc;
}

}  // namespace

PathBatch simulate(const TransitionKernel& kernel, const LagrangianSpec& lagrangian,
                   const Policy& policy, const ValueField& value, const Potential& psi,
                   const GridMeasure& mu, const SimulationOptions& options) {
  require_same_lattice(kernel, psi);
  const auto& lat = kernel.lattice();
  const auto& controls = kernel.controls();
  const std::size_t K = lat.steps();
  const std::size_t N = lat.num_nodes();
  const std::size_t d = lat.dim();
  if (options.n == 0) throw DomainError("simulate needs at least one path");
  if (policy.steps() != K || policy.nodes() != N || value.steps() != K || value.nodes() != N)
    throw StructuralError("policy or value field lives on another lattice");
  if (mu.size() != N || mu.lattice_ref() != lat.fingerprint())
    throw StructuralError("initial measure lives on another lattice");
  if (lat.nodes_per_axis() < 2) throw DomainError("simulate needs at least two nodes per axis");

  PathBatch batch;
  batch.n = options.n;
  batch.seed = options.seed;
  batch.dim = d;
  batch.checkpoints = options.checkpoints;
  if (batch.checkpoints.empty()) {
    for (std::size_t q = 0; q <= 4; ++q) batch.checkpoints.push_back(q * K / 4);
  }
  std::sort(batch.checkpoints.begin(), batch.checkpoints.end());
  batch.checkpoints.erase(std::unique(batch.checkpoints.begin(), batch.checkpoints.end()),
                          batch.checkpoints.end());
  if (batch.checkpoints.back() > K) throw DomainError("checkpoint beyond the horizon");
  const std::size_t C = batch.checkpoints.size();

  batch.stop_step.resize(options.n);
  batch.stop_node.resize(options.n);
  batch.stop_location.resize(options.n * d);
  batch.running_cost.resize(options.n);
  batch.martingale.resize(options.n * C);
  batch.checkpoint_node.resize(options.n * C);

  const double dt = lat.dt();
  const double sqdt = std::sqrt(dt);
  const double R = lat.radius();
  const std::vector<double> weights(mu.weights().begin(), mu.weights().end());

  const std::size_t shard = std::max<std::size_t>(options.shard_size, 1);
  const std::size_t shards = (options.n + shard - 1) / shard;

  auto run_shard = [&](std::size_t s) {
    std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(s + 1)));
    std::discrete_distribution<std::size_t> start(weights.begin(), weights.end());
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t lo = s * shard;
    const std::size_t hi = std::min(options.n, lo + shard);
    for (std::size_t p = lo; p < hi; ++p) {
      Point x = lat.coordinate(start(rng));
      double cost = 0.0;
      std::size_t c = 0;
      for (std::size_t k = 0; k <= K; ++k) {
        const std::size_t node = lat.nearest(x);
        if (k == K || policy.stops(k, node)) {
          batch.stop_step[p] = static_cast<std::uint32_t>(k);
          batch.stop_node[p] = static_cast<std::uint32_t>(node);
          for (std::size_t j = 0; j < d; ++j) batch.stop_location[p * d + j] = x[j];
          batch.running_cost[p] = cost;
          const double m = lookup(lat, value, k, x, options.lookup) - cost;
          for (; c < C; ++c) {
            batch.martingale[p * C + c] = m;
            batch.checkpoint_node[p * C + c] = PathBatch::kStopped;
          }
          break;
        }
        if (c < C && batch.checkpoints[c] == k) {
          batch.martingale[p * C + c] = lookup(lat, value, k, x, options.lookup) - cost;
          batch.checkpoint_node[p * C + c] = static_cast<std::uint32_t>(node);
          ++c;
        }
        const Point& u = controls[policy.control(k, node)];
        cost += eval_lagrangian(lagrangian, lat.time(k), x, u) * dt;
        for (std::size_t j = 0; j < d; ++j)
          x[j] = std::clamp(x[j] + u[j] * dt + sqdt * gauss(rng), -R, R);
      }
    }
  };

  std::size_t workers = options.threads;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, shards);
  if (workers <= 1) {
    for (std::size_t s = 0; s < shards; ++s) run_shard(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < shards; s = next++) run_shard(s);
      });
  }
  return batch;
}

Allowance discretization_allowance(const Lattice& lattice, const LagrangianSpec& lagrangian,
                                   const ControlSet& controls) {
  const double scale = std::sqrt(lattice.dt()) + lattice.h();
  double lmax = 0.0;
  for (std::size_t i = 0; i < lattice.num_nodes(); ++i)
    for (const auto& u : controls.points())
      lmax = std::max(lmax, eval_lagrangian_sup(lagrangian, lattice.horizon(),
                                                lattice.coordinate(i), u));
  Allowance a;
  a.distribution = scale;
  a.cost = lattice.horizon() * lmax * scale;
  return a;
}

DistributionReport verify_distribution(const PathBatch& batch, const StoppingDistribution& rho,
                                       double allowance) {
  const auto marg = rho.marginal();
  const std::size_t bins = marg.size();
  DistributionReport rep;
  rep.bins = bins;
  rep.allowance = allowance;
  rep.empirical.assign(bins, 0.0);
  const double n = static_cast<double>(batch.n);
  for (std::uint32_t node : batch.stop_node) {
    if (node >= bins) throw StructuralError("stopped node outside the histogram");
    rep.empirical[node] += 1.0;
  }
  rep.z_scores.assign(bins, 0.0);
  for (std::size_t i = 0; i < bins; ++i) {
    rep.empirical[i] /= n;
    rep.distance += std::abs(rep.empirical[i] - marg[i]);
    const double var = marg[i] * (1.0 - marg[i]) / n;
    const double diff = rep.empirical[i] - marg[i];
    if (var > 0.0)
      rep.z_scores[i] = diff / std::sqrt(var);
    else
      rep.z_scores[i] = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  }
  rep.bound = 3.0 * (std::sqrt(static_cast<double>(bins) / n) + allowance);
  rep.low_power = rep.bound >= 2.0;
  rep.pass = rep.distance <= rep.bound;
  return rep;
}

MartingaleReport martingale_test(const PathBatch& batch) {
  MartingaleReport rep;
  const std::size_t C = batch.checkpoints.size();
  const double n = static_cast<double>(batch.n);
  rep.two_sided_pass = true;
  rep.one_sided_pass = true;
  for (std::size_t c = 0; c + 1 < C; ++c) {
    IncrementStat st;
    st.from = batch.checkpoints[c];
    st.to = batch.checkpoints[c + 1];
    double mean = 0.0;
    for (std::size_t p = 0; p < batch.n; ++p)
      mean += batch.martingale_at(p, c + 1) - batch.martingale_at(p, c);
    mean /= n;
    double ss = 0.0;
    for (std::size_t p = 0; p < batch.n; ++p) {
      const double v = batch.martingale_at(p, c + 1) - batch.martingale_at(p, c) - mean;
      ss += v * v;
    }
    const double var = batch.n > 1 ? ss / (n - 1.0) : 0.0;
    st.mean = mean;
    st.std_error = std::sqrt(var / n);
    st.lower = mean - kZ99 * st.std_error;
    st.upper = mean + kZ99 * st.std_error;
    st.contains_zero = st.lower <= 0.0 && st.upper >= 0.0;
    rep.two_sided_pass = rep.two_sided_pass && st.contains_zero;
    rep.one_sided_pass = rep.one_sided_pass && st.lower <= 0.0;
    rep.increments.push_back(st);
  }
  rep.pass = rep.two_sided_pass;
  return rep;
}

CostReport cost_check(const PathBatch& batch, double reference, double allowance) {
  CostReport rep;
  const double n = static_cast<double>(batch.n);
  for (double c : batch.running_cost) rep.mean += c;
  rep.mean /= n;
  double ss = 0.0;
  for (double c : batch.running_cost) ss += (c - rep.mean) * (c - rep.mean);
  rep.std_error = batch.n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  rep.reference = reference;
  rep.allowance = allowance;
  rep.pass = std::abs(rep.mean - reference) <= 3.0 * rep.std_error + allowance;
  return rep;
}

std::size_t first_hit_violations(const PathBatch& batch, const BarrierMask& barrier) {
  const std::size_t C = batch.checkpoints.size();
  std::size_t bad = 0;
  for (std::size_t p = 0; p < batch.n; ++p) {
    bool hit = false;
    for (std::size_t c = 0; c < C; ++c) {
      const std::uint32_t node = batch.checkpoint_node[p * C + c];
      if (node == PathBatch::kStopped) break;
      if (barrier.contains(batch.checkpoints[c], node)) hit = true;
    }
    if (hit) ++bad;
  }
  return bad;
}

}  // namespace freestop
