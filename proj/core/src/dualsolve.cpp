#include "freestop/dualsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "freestop/error.hpp"
#include "freestop/simplex.hpp"

namespace freestop {

namespace {

constexpr std::size_t kDivergenceStreak = 100;
constexpr double kDivergenceFactor = 10.0;
constexpr double kTieReport = 1e-9;
constexpr std::size_t kMaxPool = 4096;
constexpr double kLevel = 0.5;

struct PoolEntry {
  Policy policy;
  std::vector<double> marginal;
  double cost = 0.0;
};

struct Iterate {
  Potential psi;
  QviSolution qvi;
  ForwardResult fwd;
  double cost = 0.0;
  double dual = 0.0;
  double residual = 0.0;
};

struct MasterResult {
  bool solved = false;
  double residual = std::numeric_limits<double>::infinity();
  double cost = 0.0;       ///< sum lambda_j cost_j
  double model_max = 0.0;  ///< cost plus the misfit penalty
  bool on_box = false;     ///< model maximizer touches the trust region
  std::vector<double> lambda;
  std::vector<double> model_argmax;
};

std::uint64_t policy_hash(const Policy& p) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t k = 0; k < p.steps(); ++k)
    for (std::size_t i = 0; i < p.nodes(); ++i) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.action(k, i)));
      h *= 1099511628211ULL;
    }
  return h;
}

// Restricted master over the visited stopping rules with an exact penalty on
// the marginal misfit, shifted to a center potential c:
//   min sum lambda_j (cost_j + c.(nu - marg_j)) + r |sum lambda_j marg_j - nu|_1
//   s.t. sum lambda = 1.
// c plus its marginal-row multipliers maximizes the cutting-plane model of D
// over the box |psi - c|_inf <= r.
MasterResult solve_master(const std::vector<PoolEntry>& pool, const GridMeasure& nu,
                          std::span<const double> center, double radius) {
  const std::size_t N = nu.size();
  const std::size_t P = pool.size();

  lp::LinearProgram prog;
  for (std::size_t j = 0; j < P; ++j) {
    double shift = 0.0;
    for (std::size_t x = 0; x < N; ++x) shift += center[x] * (nu[x] - pool[j].marginal[x]);
    prog.add_var(pool[j].cost + shift);
  }
  for (std::size_t x = 0; x < 2 * N; ++x) prog.add_var(radius);
  for (std::size_t x = 0; x < N; ++x) {
    lp::Row row;
    for (std::size_t j = 0; j < P; ++j)
      if (pool[j].marginal[x] != 0.0) row.terms.emplace_back(j, pool[j].marginal[x]);
    row.terms.emplace_back(P + 2 * x, 1.0);
    row.terms.emplace_back(P + 2 * x + 1, -1.0);
    row.rhs = nu[x];
    prog.add_row(std::move(row));
  }
  lp::Row simplex_row;
  for (std::size_t j = 0; j < P; ++j) simplex_row.terms.emplace_back(j, 1.0);
  simplex_row.rhs = 1.0;
  prog.add_row(std::move(simplex_row));

  MasterResult out;
  const auto sol = lp::solve(prog);
  if (sol.status != lp::Status::Optimal) return out;

  out.lambda.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(P));
  double total = 0.0;
  for (double& l : out.lambda) {
    if (l < 1e-15) l = 0.0;
    total += l;
  }
  if (total <= 0.0) return out;
  for (double& l : out.lambda) l /= total;
  out.solved = true;
  out.model_max = sol.objective;
  out.model_argmax.resize(N);
  for (std::size_t x = 0; x < N; ++x) {
    out.model_argmax[x] = center[x] + sol.duals[x];
    if (std::abs(sol.duals[x]) >= radius * (1.0 - 1e-9)) out.on_box = true;
  }
  std::vector<double> mix(N, 0.0);
  for (std::size_t j = 0; j < P; ++j) {
    if (out.lambda[j] == 0.0) continue;
    out.cost += out.lambda[j] * pool[j].cost;
    for (std::size_t x = 0; x < N; ++x) mix[x] += out.lambda[j] * pool[j].marginal[x];
  }
  out.residual = 0.0;
  for (std::size_t x = 0; x < N; ++x) out.residual += std::abs(mix[x] - nu[x]);
  return out;
}

std::size_t count_ties(const TransitionKernel& kernel, const CostTable& costs,
                       const Potential& psi, const ValueField& value) {
  const std::size_t K = value.steps();
  const std::size_t N = value.nodes();
  const std::size_t U = kernel.controls().size();
  std::size_t ties = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto next = value.slice(k + 1);
    for (std::size_t i = 0; i < N; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t u = 0; u < U; ++u) {
        double s = 0.0;
        for (const auto& e : kernel.row(i, u)) s += e.prob * next[e.target];
        best = std::max(best, s - costs.step_cost(k, i, u));
      }
      if (std::abs(best - psi[i]) <= kTieReport) ++ties;
    }
  }
  return ties;
}

bool gap_closed(double cost, double dual, double eps_gap) {
  return std::abs(cost - dual) <= eps_gap * std::max(1.0, std::abs(cost));
}

}  // namespace

double dual_value(const Potential& psi, const ValueField& value, const GridMeasure& mu,
                  const GridMeasure& nu) {
  if (psi.size() != nu.size() || value.nodes() != mu.size() || mu.size() != nu.size())
    throw StructuralError("dual_value: inputs live on different lattices");
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    a += psi[i] * nu[i];
    b += value(0, i) * mu[i];
  }
  return a - b;
}

double marginal_residual(const StoppingDistribution& rho, const GridMeasure& nu) {
  const auto marg = rho.marginal();
  if (marg.size() != nu.size()) throw StructuralError("marginal_residual: size mismatch");
  double r = 0.0;
  for (std::size_t i = 0; i < marg.size(); ++i) r += std::abs(marg[i] - nu[i]);
  return r;
}

GapReport duality_gap(double primal_cost, double dual_value, double psi_sup_norm,
                      double marginal_residual) {
  GapReport g;
  g.gap = primal_cost - dual_value;
  g.gap_adj = g.gap + psi_sup_norm * marginal_residual;
  return g;
}

Potential gauge_fixed(const Potential& psi, const GridMeasure& mu) {
  double mean = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) mean += psi[i] * mu[i];
  Potential out = psi;
  for (double& v : out.values) v -= mean;
  return out;
}

Potential zero_potential(const Problem& problem) {
  return Potential{problem.lattice().fingerprint(),
                   std::vector<double>(problem.lattice().num_nodes(), 0.0), false};
}

SolveResult ascend(const Problem& problem, const Potential& psi0) {
  const auto& kernel = problem.kernel();
  const auto& cfg = problem.config();
  const auto& mu = problem.mu();
  const auto& nu = problem.nu();
  const auto& tol = cfg.tolerances;
  const auto& par = cfg.ascent;
  require_same_lattice(kernel, psi0);
  const std::size_t N = problem.lattice().num_nodes();
  const CostTable costs(kernel, problem.lagrangian());

  auto evaluate = [&](Potential psi) {
    Iterate it;
    it.qvi = solve_qvi(kernel, costs, psi);
    it.fwd = forward_propagate(kernel, it.qvi.policy, mu);
    it.cost = primal_cost(costs, it.fwd.eta);
    it.dual = dual_value(psi, it.qvi.value, mu, nu);
    it.residual = marginal_residual(it.fwd.rho, nu);
    it.psi = std::move(psi);
    return it;
  };

  SolveReport report;
  std::vector<PoolEntry> pool;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> pool_index;
  MasterResult master;
  std::size_t pool_at_last_master = 0;
  std::size_t last_master_iter = 0;

  std::optional<Iterate> best_dual;
  std::optional<Iterate> best_residual;
  std::optional<Iterate> final_iterate;
  bool mixture_converged = false;

  Potential psi = gauge_fixed(psi0, mu);
  double initial_residual = -1.0;
  std::size_t divergence_run = 0;
  double delta = 0.0;
  std::size_t stall = 0;
  bool model_step = false;
  bool trial_pending = false;
  bool trial_on_box = false;
  double trial_base = 0.0;
  double radius = std::max(1.0, psi.sup_norm());

  for (std::size_t n = 1; n <= par.max_iter; ++n) {
    if (par.norm_every > 0 && n > 1 && (n - 1) % par.norm_every == 0)
      psi = gauge_fixed(normalize_potential(kernel, problem.lagrangian(), psi), mu);

    Iterate it = evaluate(psi);
    report.iterations = n;
    const auto gap = duality_gap(it.cost, it.dual, it.psi.sup_norm(), it.residual);
    report.history.push_back({n, it.dual, it.residual, gap.gap_adj});

    if (pool.size() < kMaxPool) {
      const auto h = policy_hash(it.qvi.policy);
      auto& bucket = pool_index[h];
      const bool seen = std::any_of(bucket.begin(), bucket.end(), [&](std::size_t j) {
        return pool[j].policy == it.qvi.policy;
      });
      if (!seen) {
        bucket.push_back(pool.size());
        pool.push_back({it.qvi.policy, it.fwd.rho.marginal(), it.cost});
      }
    }

    if (trial_pending) {
      if (it.dual > trial_base && trial_on_box) radius *= 2.0;
      trial_pending = false;
    }
    const bool improved = !best_dual || it.dual > best_dual->dual;
    if (improved) best_dual = it;
    if (!best_residual || it.residual < best_residual->residual) best_residual = it;
    if (initial_residual < 0.0) {
      initial_residual = it.residual;
      delta = 0.1 * std::max(1.0, std::abs(it.dual));
    }

    if (it.residual <= tol.eps_marginal && gap_closed(it.cost, it.dual, tol.eps_gap)) {
      final_iterate = std::move(it);
      report.converged = true;
      break;
    }

    const std::size_t fresh = pool.size() - pool_at_last_master;
    if (fresh > 0 && (fresh >= 1 + pool.size() / 20 || n - last_master_iter >= 10)) {
      master = solve_master(pool, nu, best_dual->psi.values, radius);
      pool_at_last_master = pool.size();
      last_master_iter = n;
      model_step = master.solved;
    }
    const bool master_feasible = master.solved && master.residual <= tol.eps_marginal;
    if (master_feasible && gap_closed(master.cost, best_dual->dual, tol.eps_gap)) {
      mixture_converged = true;
      report.converged = true;
      break;
    }

    if (it.residual > kDivergenceFactor * std::max(initial_residual, tol.eps_marginal)) {
      if (++divergence_run >= kDivergenceStreak) {
        std::vector<std::array<double, 2>> hist;
        hist.reserve(report.history.size());
        for (const auto& e : report.history) hist.push_back({e.dual_value, e.residual});
        std::ostringstream msg;
        msg << "dual ascent diverged: marginal residual above " << kDivergenceFactor
            << "x its initial value " << initial_residual << " for " << kDivergenceStreak
            << " consecutive iterations (iteration " << n << ")";
        throw NumericalError(msg.str(), std::move(hist));
      }
    } else {
      divergence_run = 0;
    }

    if (model_step) {
      // Cutting-plane trial point: either it attains the model maximum and
      // closes the gap, or its stopping rule is a new cut.
      model_step = false;
      trial_pending = true;
      trial_on_box = master.on_box;
      trial_base = best_dual->dual;
      psi.values = master.model_argmax;
      psi.normalized = false;
      psi = gauge_fixed(psi, mu);
      continue;
    }

    std::vector<double> g(N);
    const auto marg = it.fwd.rho.marginal();
    double g2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      g[i] = nu[i] - marg[i];
      g2 += g[i] * g[i];
    }
    if (g2 == 0.0) break;

    double sigma = par.step0;
    switch (par.rule) {
      case StepRule::InverseSqrt:
        sigma = par.step0 / std::sqrt(static_cast<double>(n));
        break;
      case StepRule::Fixed:
        break;
      case StepRule::Polyak: {
        if (improved) {
          stall = 0;
        } else if (++stall >= 10) {
          delta *= 0.5;
          stall = 0;
        }
        double target = best_dual->dual + delta;
        if (master.solved)
          target = best_dual->dual + kLevel * (master.model_max - best_dual->dual);
        const double lift = std::max(target - it.dual, 1e-14 * std::max(1.0, std::abs(it.dual)));
        sigma = par.step0 * lift / g2;
        break;
      }
    }
    for (std::size_t i = 0; i < N; ++i) psi.values[i] = it.psi[i] + sigma * g[i];
    psi.normalized = false;
    psi = gauge_fixed(psi, mu);
  }

  if (!master.solved && pool.size() > pool_at_last_master)
    master = solve_master(pool, nu, best_dual->psi.values, radius);

  SolveResult out;
  const Iterate& anchor = final_iterate ? *final_iterate : *best_dual;
  out.psi = anchor.psi;
  out.value = anchor.qvi.value;
  out.policy = anchor.qvi.policy;
  report.dual_value = anchor.dual;
  report.pool_size = pool.size();
  report.upper_bound = master.solved ? master.cost : std::numeric_limits<double>::infinity();

  const bool use_mixture =
      !final_iterate && master.solved &&
      (mixture_converged || master.residual <= best_residual->residual);
  if (final_iterate) {
    out.eta = anchor.fwd.eta;
    out.rho = anchor.fwd.rho;
    report.primal_cost = anchor.cost;
    report.marginal_residual = anchor.residual;
    report.boundary_mass = anchor.fwd.boundary_mass;
    report.terminal_mass = anchor.fwd.terminal_mass;
    report.mixture_size = 1;
  } else if (use_mixture) {
    const std::size_t U = kernel.controls().size();
    const std::size_t K = problem.lattice().steps();
    out.eta = OccupationMeasure(K, N, U);
    out.rho = StoppingDistribution(K, N);
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const double w = master.lambda[j];
      if (w == 0.0) continue;
      ++report.mixture_size;
      const auto fwd = forward_propagate(kernel, pool[j].policy, mu);
      out.eta.accumulate(fwd.eta, w);
      out.rho.accumulate(fwd.rho, w);
      report.boundary_mass += w * fwd.boundary_mass;
      report.terminal_mass += w * fwd.terminal_mass;
    }
    report.primal_cost = primal_cost(costs, out.eta);
    report.marginal_residual = marginal_residual(out.rho, nu);
  } else {
    const Iterate& r = *best_residual;
    out.eta = r.fwd.eta;
    out.rho = r.fwd.rho;
    report.primal_cost = r.cost;
    report.marginal_residual = r.residual;
    report.boundary_mass = r.fwd.boundary_mass;
    report.terminal_mass = r.fwd.terminal_mass;
    report.mixture_size = 1;
  }
  if (report.converged && report.marginal_residual > tol.eps_marginal) report.converged = false;

  const auto gap = duality_gap(report.primal_cost, report.dual_value, out.psi.sup_norm(),
                               report.marginal_residual);
  report.gap = gap.gap;
  report.gap_adj = gap.gap_adj;
  report.tied_nodes = count_ties(kernel, costs, out.psi, out.value);

  if (!report.converged) report.flags.push_back("max_iter_reached");
  if (report.boundary_mass > tol.eps_mass) report.flags.push_back("boundary_mass_above_eps_mass");
  if (report.terminal_mass > tol.eps_mass) report.flags.push_back("terminal_mass_above_eps_mass");
  if (report.tied_nodes > 0) report.flags.push_back("barrier_ties_present");
  if (report.mixture_size > 1) report.flags.push_back("randomized_stopping");
  out.report = std::move(report);
  return out;
}

}  // namespace freestop
