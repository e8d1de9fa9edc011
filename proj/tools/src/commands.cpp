#include "freestop/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "freestop/cli/config.hpp"
#include "freestop/cli/io.hpp"
#include "freestop/dualsolve.hpp"
#include "freestop/error.hpp"
#include "freestop/montecarlo.hpp"
#include "freestop/oracle.hpp"

namespace freestop::cli {

namespace {

const std::filesystem::path& require(const std::optional<std::filesystem::path>& p,
                                     const char* flag) {
  if (!p) throw ConfigError(std::string("missing required option ") + flag);
  return *p;
}

void check_policy_controls(const Policy& policy, const ControlSet& controls) {
  for (std::size_t k = 0; k < policy.steps(); ++k)
    for (std::size_t i = 0; i < policy.nodes(); ++i)
      if (!policy.stops(k, i) && policy.control(k, i) >= controls.size())
        throw ConfigError("policy uses control index " + std::to_string(policy.control(k, i)) +
                          " but the control grid has " + std::to_string(controls.size()) +
                          " controls");
}

void write_solution(const CommandOptions& o, const Problem& pb, const SolveResult& r) {
  const auto& lat = pb.lattice();
  write_file(o.out, "psi.csv", [&](std::ostream& s) { write_potential(s, lat, r.psi); });
  write_file(o.out, "J.csv", [&](std::ostream& s) { write_value(s, lat, r.value); });
  write_file(o.out, "barrier.csv",
             [&](std::ostream& s) { write_barrier(s, lat, extract_barrier(r.value, r.psi)); });
  write_file(o.out, "policy.csv", [&](std::ostream& s) { write_policy(s, lat, r.policy); });
  write_file(o.out, "m.csv", [&](std::ostream& s) { write_alive_mass(s, lat, r.eta); });
  write_file(o.out, "rho.csv", [&](std::ostream& s) { write_stopping(s, lat, r.rho); });
  write_file(o.out, "history.csv", [&](std::ostream& s) { write_history(s, r.report.history); });
  write_file(o.out, "report.csv",
             [&](std::ostream& s) { write_key_values(s, report_rows(r.report)); });
}

void print_report(std::ostream& log, const SolveReport& r) {
  log << (r.converged ? "converged" : "NOT converged") << " after " << r.iterations
      << " iterations\n"
      << "  dual value        " << format_double(r.dual_value) << '\n'
      << "  primal cost       " << format_double(r.primal_cost) << '\n'
      << "  marginal residual " << format_double(r.marginal_residual) << '\n'
      << "  gap_adj           " << format_double(r.gap_adj) << '\n';
  for (const auto& f : r.flags) log << "  flag: " << f << '\n';
}

}  // namespace

int run_solve(const CommandOptions& o, std::ostream& log) {
  const Problem pb(parse_config(o.config));
  const SolveResult r = ascend(pb, zero_potential(pb));
  write_solution(o, pb, r);
  print_report(log, r.report);
  log << "artifacts written to " << o.out.string() << '\n';
  return r.report.converged ? kSuccess : kNotConverged;
}

int run_hjb(const CommandOptions& o, std::ostream& log) {
  const Problem pb(parse_config(o.config));
  const auto& lat = pb.lattice();
  const Potential psi = read_potential(require(o.psi, "--psi"), lat);
  const QviSolution sol = solve_qvi(pb.kernel(), pb.lagrangian(), psi);
  const BarrierMask barrier = extract_barrier(sol.value, psi);
  const double dual = dual_value(psi, sol.value, pb.mu(), pb.nu());
  write_file(o.out, "J.csv", [&](std::ostream& s) { write_value(s, lat, sol.value); });
  write_file(o.out, "barrier.csv", [&](std::ostream& s) { write_barrier(s, lat, barrier); });
  write_file(o.out, "policy.csv", [&](std::ostream& s) { write_policy(s, lat, sol.policy); });
  write_file(o.out, "hjb_report.csv", [&](std::ostream& s) {
    write_key_values(s, {{"dual_value", format_double(dual)},
                         {"barrier_nodes", std::to_string(barrier.count())}});
  });
  log << "dual value " << format_double(dual) << ", barrier nodes " << barrier.count() << '\n';
  return kSuccess;
}

int run_forward(const CommandOptions& o, std::ostream& log) {
  const Problem pb(parse_config(o.config));
  const auto& lat = pb.lattice();
  const Policy policy = read_policy(require(o.policy, "--policy"), lat);
  check_policy_controls(policy, pb.controls());
  const ForwardResult fwd = forward_propagate(pb.kernel(), policy, pb.mu());
  const double cost = primal_cost(pb.kernel(), pb.lagrangian(), fwd.eta);
  const double residual = marginal_residual(fwd.rho, pb.nu());
  write_file(o.out, "m.csv", [&](std::ostream& s) { write_alive_mass(s, lat, fwd.eta); });
  write_file(o.out, "rho.csv", [&](std::ostream& s) { write_stopping(s, lat, fwd.rho); });
  write_file(o.out, "forward_report.csv", [&](std::ostream& s) {
    write_key_values(s, {{"primal_cost", format_double(cost)},
                         {"marginal_residual", format_double(residual)},
                         {"boundary_mass", format_double(fwd.boundary_mass)},
                         {"terminal_mass", format_double(fwd.terminal_mass)},
                         {"max_conservation_error", format_double(fwd.max_conservation_error)}});
  });
  log << "primal cost " << format_double(cost) << ", marginal residual "
      << format_double(residual) << '\n';
  return kSuccess;
}

int run_oracle(const CommandOptions& o, std::ostream& log) {
  const Problem pb(parse_config(o.config));
  const auto& lat = pb.lattice();
  oracle::LpResult lp;
  try {
    lp = oracle::lp_solve(pb);
  } catch (const InfeasibleError& e) {
    write_file(o.out, "farkas.csv", [&](std::ostream& s) {
      s << "row,multiplier\n";
      for (std::size_t i = 0; i < e.certificate().size(); ++i)
        s << i << ',' << format_double(e.certificate()[i]) << '\n';
    });
    throw;
  }
  const SolveResult r = ascend(pb, zero_potential(pb));
  const double scale = std::max(1.0, std::abs(lp.objective));
  const double dual_error = std::abs(r.report.dual_value - lp.objective) / scale;
  write_file(o.out, "lp_psi.csv", [&](std::ostream& s) { write_potential(s, lat, lp.psi); });
  write_file(o.out, "lp_J.csv", [&](std::ostream& s) { write_value(s, lat, lp.value); });
  write_file(o.out, "oracle_report.csv", [&](std::ostream& s) {
    write_key_values(s, {{"lp_objective", format_double(lp.objective)},
                         {"lp_dual_objective", format_double(lp.dual_objective)},
                         {"lp_pivots", std::to_string(lp.pivots)},
                         {"solve_dual_value", format_double(r.report.dual_value)},
                         {"solve_primal_cost", format_double(r.report.primal_cost)},
                         {"solve_marginal_residual", format_double(r.report.marginal_residual)},
                         {"solve_converged", r.report.converged ? "1" : "0"},
                         {"relative_dual_error", format_double(dual_error)}});
  });
  log << "LP objective " << format_double(lp.objective) << " (dual "
      << format_double(lp.dual_objective) << ")\n"
      << "solve dual value " << format_double(r.report.dual_value) << ", relative error "
      << format_double(dual_error) << '\n';
  return r.report.converged ? kSuccess : kNotConverged;
}

int run_mc(const CommandOptions& o, std::ostream& log) {
  const Problem pb(parse_config(o.config));
  const auto& lat = pb.lattice();
  const SolveResult r = ascend(pb, zero_potential(pb));
  print_report(log, r.report);

  SimulationOptions so;
  so.n = o.n.value_or(pb.config().mc.n);
  so.seed = o.seed.value_or(pb.config().mc.seed);
  if (so.n < 1) throw ConfigError("--n must be >= 1");
  const ForwardResult fwd = forward_propagate(pb.kernel(), r.policy, pb.mu());
  const double reference = primal_cost(pb.kernel(), pb.lagrangian(), fwd.eta);
  const PathBatch batch =
      simulate(pb.kernel(), pb.lagrangian(), r.policy, r.value, r.psi, pb.mu(), so);
  const Allowance allow = discretization_allowance(lat, pb.lagrangian(), pb.controls());
  const DistributionReport dist = verify_distribution(batch, fwd.rho, allow.distribution);
  const CostReport cost = cost_check(batch, reference, allow.cost);
  const MartingaleReport mart = martingale_test(batch);
  const std::size_t violations =
      first_hit_violations(batch, extract_barrier(r.value, r.psi));

  write_file(o.out, "mc_report.csv", [&](std::ostream& s) {
    write_key_values(s, {{"n", std::to_string(batch.n)},
                         {"seed", std::to_string(batch.seed)},
                         {"distribution_distance", format_double(dist.distance)},
                         {"distribution_bound", format_double(dist.bound)},
                         {"distribution_allowance", format_double(dist.allowance)},
                         {"distribution_low_power", dist.low_power ? "1" : "0"},
                         {"distribution_pass", dist.pass ? "1" : "0"},
                         {"cost_mean", format_double(cost.mean)},
                         {"cost_std_error", format_double(cost.std_error)},
                         {"cost_reference", format_double(cost.reference)},
                         {"cost_allowance", format_double(cost.allowance)},
                         {"cost_pass", cost.pass ? "1" : "0"},
                         {"martingale_two_sided_pass", mart.two_sided_pass ? "1" : "0"},
                         {"martingale_one_sided_pass", mart.one_sided_pass ? "1" : "0"},
                         {"first_hit_violations", std::to_string(violations)}});
  });
  write_file(o.out, "mc_histogram.csv",
             [&](std::ostream& s) { write_distribution_report(s, lat, fwd.rho, dist); });
  write_file(o.out, "mc_martingale.csv",
             [&](std::ostream& s) { write_martingale_report(s, mart); });
  if (o.trace > 0)
    write_file(o.out, "mc_paths.csv",
               [&](std::ostream& s) { write_path_trace(s, batch, o.trace); });

  log << "paths " << batch.n << " (seed " << batch.seed << ")\n"
      << "  stopped histogram L1 " << format_double(dist.distance) << " <= "
      << format_double(dist.bound) << (dist.pass ? "  pass" : "  FAIL")
      << (dist.low_power ? " (low power)" : "") << '\n'
      << "  mean cost " << format_double(cost.mean) << " vs " << format_double(cost.reference)
      << (cost.pass ? "  pass" : "  FAIL") << '\n';
  for (const auto& inc : mart.increments)
    log << "  M[" << inc.from << " -> " << inc.to << "] mean " << format_double(inc.mean)
        << " 99% CI [" << format_double(inc.lower) << ", " << format_double(inc.upper) << "]"
        << (inc.contains_zero ? "" : "  excludes 0") << '\n';
  log << "  first-hit violations " << violations << '\n';
  return kSuccess;
}

int run_diag(const CommandOptions& o, std::ostream& log) {
  const Problem pb(parse_config(o.config));
  const auto& lat = pb.lattice();
  const Potential psi = read_potential(require(o.psi, "--psi"), lat);
  const SupersolutionReport sup = check_supersolution(pb.kernel(), pb.lagrangian(), psi);
  const double p = pb.lagrangian().p;
  const double delta =
      o.delta.value_or(lat.dim() == 1 ? 1.0 : std::clamp(2.0 - p, 1e-3, 1.0));
  const HolderReport holder = holder_diagnostic(lat, psi, delta, p);
  const QviSolution sol = solve_qvi(pb.kernel(), pb.lagrangian(), psi);
  const ForwardResult fwd = forward_propagate(pb.kernel(), sol.policy, pb.mu());
  const double cost = primal_cost(pb.kernel(), pb.lagrangian(), fwd.eta);
  const MomentBoundReport moment =
      check_moment_bound(lat, pb.controls(), pb.mu(), fwd.rho, cost, pb.lagrangian());
  const double energy = dirichlet_energy(lat, fwd.eta);

  write_file(o.out, "diag_supersolution.csv", [&](std::ostream& s) {
    Potential residual{lat.fingerprint(), sup.residual, false};
    write_potential(s, lat, residual);
  });
  write_file(o.out, "diag_report.csv", [&](std::ostream& s) {
    write_key_values(s, {{"supersolution_max_residual", format_double(sup.max_residual)},
                         {"supersolution_violations", std::to_string(sup.violations.size())},
                         {"holder_delta", format_double(holder.delta)},
                         {"holder_B", format_double(holder.B)},
                         {"holder_E", format_double(holder.E)},
                         {"holder_label", holder.label},
                         {"moment_lhs", format_double(moment.lhs)},
                         {"moment_base", format_double(moment.base)},
                         {"moment_constant", format_double(moment.constant)},
                         {"moment_rhs", format_double(moment.rhs)},
                         {"moment_pass", moment.pass ? "1" : "0"},
                         {"primal_cost", format_double(cost)},
                         {"dirichlet_energy", format_double(energy)}});
  });
  log << "supersolution max residual " << format_double(sup.max_residual) << " ("
      << sup.violations.size() << " violations)\n"
      << "Holder delta " << format_double(holder.delta) << ": B " << format_double(holder.B)
      << ", E " << format_double(holder.E) << " [" << holder.label << "]\n"
      << "moment bound " << format_double(moment.lhs) << " <= " << format_double(moment.rhs)
      << (moment.pass ? "  pass" : "  FAIL") << '\n';
  return kSuccess;
}

int run_guarded(Command command, const CommandOptions& options, std::ostream& log,
                std::ostream& err) {
  try {
    return command(options, log);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Numerical: return kNotConverged;
      case ErrorKind::Infeasible: return kInfeasible;
      default: return kConfigError;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace freestop::cli
