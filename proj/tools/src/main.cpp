#include <iostream>

#include "CLI11.hpp"
#include "freestop/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace freestop::cli;
  CLI::App app{"freestop: optimal stopping transport on a space-time lattice"};
  app.require_subcommand(1);
  app.fallthrough();

  CommandOptions opt;
  std::string out = ".";
  app.add_option("--out,-o", out, "Directory for CSV artifacts")->capture_default_str();

  auto config_arg = [&](CLI::App* sub) {
    sub->add_option("config", opt.config, "JSON configuration file")->required()->check(
        CLI::ExistingFile);
  };

  auto* solve = app.add_subcommand("solve", "Dual ascent solve; writes psi, J, barrier, m, rho, "
                                            "history and report CSVs");
  config_arg(solve);

  auto* hjb = app.add_subcommand("hjb", "Single backward solve for a given potential");
  config_arg(hjb);
  hjb->add_option("--psi", opt.psi, "Potential CSV (coordinates, psi)")->required();

  auto* forward = app.add_subcommand("forward", "Single forward solve for a given policy");
  config_arg(forward);
  forward->add_option("--policy", opt.policy, "Policy CSV (k, coordinates, action)")->required();

  auto* oracle = app.add_subcommand("oracle", "Exact LP solve compared against the dual solve");
  config_arg(oracle);

  auto* mc = app.add_subcommand("mc", "Monte-Carlo verification of a solve");
  config_arg(mc);
  mc->add_option("--n", opt.n, "Number of paths (default mc.n)");
  mc->add_option("--seed", opt.seed, "Random seed (default mc.seed)");
  mc->add_option("--trace", opt.trace, "Write the first N paths to mc_paths.csv");

  auto* diag = app.add_subcommand("diag", "Supersolution, Holder and moment-bound diagnostics");
  config_arg(diag);
  diag->add_option("--psi", opt.psi, "Potential CSV (coordinates, psi)")->required();
  diag->add_option("--delta", opt.delta, "Holder exponent in (0, 1]")
      ->check(CLI::Range(1e-9, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }
  opt.out = out;

  Command command = nullptr;
  if (*solve) command = run_solve;
  if (*hjb) command = run_hjb;
  if (*forward) command = run_forward;
  if (*oracle) command = run_oracle;
  if (*mc) command = run_mc;
  if (*diag) command = run_diag;
  return run_guarded(command, opt, std::cout, std::cerr);
}
