#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "freestop/cli/commands.hpp"
#include "freestop/cli/config.hpp"
#include "freestop/cli/io.hpp"
#include "freestop/error.hpp"
#include "json.hpp"

namespace freestop {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("freestop_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
    write("mu.csv", "x1,weight\n0,1\n");
    write("nu.csv", "x1,weight\n-1,0.25\n0,0.5\n1,0.25\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& body) const {
    std::ofstream(dir_ / name) << body;
  }
  std::string read(const fs::path& path) const {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // One driftless step on five nodes: mu = delta_0, nu = (1/4, 1/2, 1/4).
  static json tiny() {
    return json::parse(R"({
      "lagrangian": {"kind": "power_law", "a_u": 0.5, "a_0": 1, "time_profile": "constant",
                     "c": 0.5, "C": 1},
      "grid": {"d": 1, "h": 1, "dt": 0.5, "T": 0.5, "R": 2},
      "controls": {"per_axis": 1, "max": 0},
      "measures": {"mu_file": "mu.csv", "nu_file": "nu.csv"}
    })");
  }

  fs::path save(const json& cfg, const std::string& name = "cfg.json") const {
    write(name, cfg.dump(2));
    return dir_ / name;
  }

  std::string config_error(const json& cfg) const {
    try {
      cli::parse_config_text(cfg.dump(), dir_);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return {};
  }

  int run(cli::Command command, cli::CommandOptions o) const {
    std::ostringstream log;
    std::ostringstream err;
    return cli::run_guarded(command, o, log, err);
  }

  fs::path dir_;
};

TEST_F(CliTest, ParsesValidConfiguration) {
  const auto cfg = cli::parse_config(save(tiny()));
  EXPECT_EQ(cfg.grid.dim, 1u);
  EXPECT_DOUBLE_EQ(cfg.grid.dt, 0.5);
  EXPECT_EQ(cfg.controls.size(), 1u);
  EXPECT_DOUBLE_EQ(cfg.mu[2], 1.0);
  EXPECT_DOUBLE_EQ(cfg.nu[1], 0.25);
  EXPECT_DOUBLE_EQ(cfg.lagrangian.coercivity.c, 0.5);
  EXPECT_NO_THROW(Problem{cfg});
}

TEST_F(CliTest, TimeProfileAcceptsObjectForm) {
  auto j = tiny();
  j["lagrangian"]["time_profile"] = {{"kind", "increasing"}, {"rate", 0.25}};
  j["lagrangian"]["C"] = 2;
  const auto cfg = cli::parse_config_text(j.dump(), dir_);
  EXPECT_EQ(cfg.lagrangian.profile.kind, TimeProfileKind::StrictlyIncreasing);
  EXPECT_DOUBLE_EQ(cfg.lagrangian.profile.rate, 0.25);
}

TEST_F(CliTest, ReportsEveryProblemWithItsKeyPath) {
  auto j = tiny();
  j["grid"].erase("h");
  j["lagrangian"]["a_u"] = "half";
  j["lagrangian"]["colour"] = 1;
  j["mc"] = {{"n", -5}};
  const std::string msg = config_error(j);
  EXPECT_NE(msg.find("grid.h: missing key"), std::string::npos) << msg;
  EXPECT_NE(msg.find("lagrangian.a_u: expected a number, found string"), std::string::npos) << msg;
  EXPECT_NE(msg.find("lagrangian.colour: unknown key"), std::string::npos) << msg;
  EXPECT_NE(msg.find("mc.n: expected a nonnegative integer"), std::string::npos) << msg;
}

TEST_F(CliTest, CflViolationStatesTheBound) {
  auto j = tiny();
  j["controls"] = {{"per_axis", 3}, {"max", 2}};
  const std::string msg = config_error(j);
  EXPECT_NE(msg.find("CFL violation"), std::string::npos) << msg;
  EXPECT_NE(msg.find("need dt <= "), std::string::npos) << msg;
}

TEST_F(CliTest, InconsistentStepsAreReported) {
  auto j = tiny();
  j["grid"]["T"] = 0.75;
  EXPECT_NE(config_error(j).find("T/dt"), std::string::npos);
}

TEST_F(CliTest, MeasureRowsOffTheGridOrOnTheBoundaryAreRejected) {
  write("nu_off.csv", "x1,weight\n0.3,1\n");
  write("nu_edge.csv", "x1,weight\n2,0.5\n0,0.5\n");
  auto j = tiny();
  j["measures"]["nu_file"] = "nu_off.csv";
  const std::string off = config_error(j);
  EXPECT_NE(off.find("measures.nu_file"), std::string::npos) << off;
  j["measures"]["nu_file"] = "nu_edge.csv";
  const std::string edge = config_error(j);
  EXPECT_NE(edge.find("box boundary"), std::string::npos) << edge;
  EXPECT_NE(edge.find("(2)"), std::string::npos) << edge;
}

TEST_F(CliTest, MissingMeasureFileIsAConfigError) {
  auto j = tiny();
  j["measures"]["mu_file"] = "absent.csv";
  EXPECT_NE(config_error(j).find("measures.mu_file"), std::string::npos);
}

TEST_F(CliTest, PotentialAndPolicyFilesRoundTrip) {
  const Lattice lat = build_lattice(GridSpec{2, 0.5, 0.05, 0.1, 1.0});
  Potential psi{lat.fingerprint(), {}, false};
  for (std::size_t i = 0; i < lat.num_nodes(); ++i) psi.values.push_back(0.1 + 1.0 / (3.0 + i));
  Policy pol(lat.steps(), lat.num_nodes());
  for (std::size_t i = 0; i < lat.num_nodes(); i += 2) pol.set_continue(1, i, i % 4);
  cli::write_file(dir_, "psi.csv", [&](std::ostream& s) { cli::write_potential(s, lat, psi); });
  cli::write_file(dir_, "policy.csv", [&](std::ostream& s) { cli::write_policy(s, lat, pol); });
  EXPECT_EQ(cli::read_potential(dir_ / "psi.csv", lat).values, psi.values);
  EXPECT_EQ(cli::read_policy(dir_ / "policy.csv", lat), pol);
}

TEST_F(CliTest, MalformedCsvNamesFileAndLine) {
  write("bad.csv", "x1,weight\n0,1\n1,oops\n");
  try {
    cli::read_numeric_csv(dir_ / "bad.csv");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3"), std::string::npos) << msg;
  }
}

TEST_F(CliTest, SolveThenReplayPolicyAndValue) {
  const fs::path out = dir_ / "out";
  cli::CommandOptions o;
  o.config = save(tiny());
  o.out = out;
  ASSERT_EQ(run(cli::run_solve, o), cli::kSuccess);
  for (const char* f : {"psi.csv", "J.csv", "barrier.csv", "policy.csv", "m.csv", "rho.csv",
                        "history.csv", "report.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const std::string rho = read(out / "rho.csv");

  cli::CommandOptions fwd = o;
  fwd.out = dir_ / "fwd";
  fwd.policy = out / "policy.csv";
  ASSERT_EQ(run(cli::run_forward, fwd), cli::kSuccess);
  EXPECT_EQ(read(dir_ / "fwd" / "rho.csv"), rho);

  cli::CommandOptions hjb = o;
  hjb.out = dir_ / "hjb";
  hjb.psi = out / "psi.csv";
  ASSERT_EQ(run(cli::run_hjb, hjb), cli::kSuccess);
  EXPECT_EQ(read(dir_ / "hjb" / "J.csv"), read(out / "J.csv"));

  cli::CommandOptions diag = hjb;
  diag.out = dir_ / "diag";
  EXPECT_EQ(run(cli::run_diag, diag), cli::kSuccess);
  EXPECT_TRUE(fs::exists(dir_ / "diag" / "diag_report.csv"));
}

TEST_F(CliTest, ExitCodes) {
  cli::CommandOptions o;
  o.out = dir_ / "out";

  auto broken = tiny();
  broken["grid"].erase("R");
  o.config = save(broken, "broken.json");
  EXPECT_EQ(run(cli::run_solve, o), cli::kConfigError);

  write("nu_far.csv", "x1,weight\n-1,1\n");
  auto far = tiny();
  far["measures"]["nu_file"] = "nu_far.csv";
  far["solver"] = {{"max_iter", 20}};
  o.config = save(far, "far.json");
  EXPECT_EQ(run(cli::run_oracle, o), cli::kInfeasible);
  EXPECT_TRUE(fs::exists(o.out / "farkas.csv"));
  EXPECT_EQ(run(cli::run_solve, o), cli::kNotConverged);

  o.config = save(tiny());
  EXPECT_EQ(run(cli::run_oracle, o), cli::kSuccess);
  o.n = 2000;
  o.seed = 3;
  o.trace = 5;
  EXPECT_EQ(run(cli::run_mc, o), cli::kSuccess);
  EXPECT_TRUE(fs::exists(o.out / "mc_paths.csv"));
}

}  // namespace
}  // namespace freestop
