#include <gtest/gtest.h>

#include <cmath>

#include "freestop/hjb.hpp"
#include "freestop/transport.hpp"
#include "support/instances.hpp"
#include "support/reference.hpp"

namespace freestop {
namespace {

LagrangianSpec quadratic() {
  LagrangianSpec L;
  L.a_u = 0.5;
  L.a_0 = 1.0;
  return L;
}

ControlSet three_controls() {
  return ControlSet::from_points({Point{-1.0}, Point{0.0}, Point{1.0}});
}

GridMeasure delta_at(const Lattice& lat, std::size_t node) {
  std::vector<double> w(lat.num_nodes(), 0.0);
  w[node] = 1.0;
  return GridMeasure(lat.fingerprint(), w);
}

TEST(Forward, StopEverywhereLeavesMuInPlace) {
  const Lattice lat = build_lattice(GridSpec{1, 1.0, 0.25, 0.5, 1.0});
  const auto k = build_kernel(lat, three_controls());
  const GridMeasure mu(lat.fingerprint(), {0.25, 0.5, 0.25});
  const auto f = forward_propagate(k, Policy(2, 3), mu);
  EXPECT_TRUE(f.eta.is_zero());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(f.rho.at(0, i), mu[i]);
  EXPECT_DOUBLE_EQ(f.rho.total(), 1.0);
  EXPECT_EQ(primal_cost(k, quadratic(), f.eta), 0.0);
}

TEST(Forward, OneStepDiffusionFromCenter) {
  const Lattice lat = build_lattice(GridSpec{1, 1.0, 0.5, 0.5, 1.0});
  const auto k = build_kernel(lat, ControlSet::from_points({Point{0.0}}));
  Policy pol(1, 3);
  pol.set_continue(0, 1, 0);
  const auto f = forward_propagate(k, pol, delta_at(lat, 1));
  EXPECT_DOUBLE_EQ(f.rho.at(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(f.rho.at(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(f.rho.at(1, 2), 0.25);
  EXPECT_DOUBLE_EQ(f.terminal_mass, 1.0);
  EXPECT_DOUBLE_EQ(primal_cost(k, quadratic(), f.eta), 0.5);
}

TEST(Forward, TwoStepValleyPolicy) {
  const Lattice lat = build_lattice(GridSpec{1, 1.0, 0.25, 0.5, 1.0});
  const auto k = build_kernel(lat, three_controls());
  Potential psi;
  psi.lattice_ref = lat.fingerprint();
  psi.values = {1.0, 0.0, 1.0};
  const auto sol = solve_qvi(k, quadratic(), psi);
  const auto f = forward_propagate(k, sol.policy, delta_at(lat, 1));

  const double m1[] = {3.0 / 8.0, 1.0 / 2.0, 1.0 / 8.0};
  const double m2[] = {3.0 / 16.0, 1.0 / 4.0, 1.0 / 16.0};
  const double rho1[] = {3.0 / 8.0, 0.0, 1.0 / 8.0};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(f.eta.alive(1, i), m1[i]);
    EXPECT_DOUBLE_EQ(f.eta.alive(2, i), m2[i]);
    EXPECT_DOUBLE_EQ(f.rho.at(0, i), 0.0);
    EXPECT_DOUBLE_EQ(f.rho.at(1, i), rho1[i]);
    EXPECT_DOUBLE_EQ(f.rho.at(2, i), m2[i]);
  }
  EXPECT_DOUBLE_EQ(f.eta.continuing(0, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(f.eta.continuing(1, 1, 1), 0.5);
  EXPECT_DOUBLE_EQ(primal_cost(k, quadratic(), f.eta), 9.0 / 16.0);
  EXPECT_DOUBLE_EQ(f.terminal_mass, 0.5);
  EXPECT_LE(f.max_conservation_error, 1e-15);

  const auto mom = check_moment_bound(lat, k.controls(), delta_at(lat, 1), f.rho, 9.0 / 16.0,
                                      quadratic());
  EXPECT_DOUBLE_EQ(mom.lhs, 0.75);
  EXPECT_DOUBLE_EQ(mom.base, 0.0);
  EXPECT_DOUBLE_EQ(mom.constant, 4.0);
  EXPECT_DOUBLE_EQ(mom.rhs, 2.25);
  EXPECT_TRUE(mom.pass);
}

TEST(Forward, BoundaryMassCountsFoldedProbability) {
  const Lattice lat = build_lattice(GridSpec{1, 1.0, 0.5, 0.5, 1.0});
  const auto k = build_kernel(lat, ControlSet::from_points({Point{0.0}}));
  Policy pol(1, 3);
  pol.set_continue(0, 0, 0);
  const auto f = forward_propagate(k, pol, delta_at(lat, 0));
  EXPECT_DOUBLE_EQ(f.boundary_mass, 0.25);
  EXPECT_DOUBLE_EQ(f.rho.at(1, 0), 0.75);
}

TEST(Dirichlet, StoppedUniformMassHasNoEnergy) {
  const Lattice lat = build_lattice(GridSpec{1, 1.0, 0.25, 0.5, 1.0});
  const auto k = build_kernel(lat, three_controls());
  const GridMeasure mu(lat.fingerprint(), {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  const auto f = forward_propagate(k, Policy(2, 3), mu);
  EXPECT_NEAR(dirichlet_energy(lat, f.eta), 0.0, 1e-15);
}

// Property: random stopping rules on random d = 1 chains conserve mass,
// reproduce the independent long-double propagation and cost, keep every
// entry nonnegative, and satisfy the explicit second-moment bound.
TEST(ForwardProperties, ConservationAgreementAndMomentBound) {
  testing::Gen g(99);
  for (int trial = 0; trial < 200; ++trial) {
    testing::Line line;
    line.nodes = 3 + 2 * g.index(5);
    line.h = 0.5;
    line.dt = 0.05;
    line.steps = 1 + g.index(10);
    line.lagrangian.a_u = g.uniform(0.1, 1.0);
    line.lagrangian.a_x = g.uniform(0.0, 0.5);
    line.lagrangian.a_0 = g.uniform(0.1, 1.0);
    line.lagrangian.profile = {trial % 2 ? TimeProfileKind::Constant
                                         : TimeProfileKind::StrictlyIncreasing,
                               g.uniform(0.1, 2.0)};
    line.lagrangian.coercivity = {line.lagrangian.a_0, 100.0};
    const double R = line.h * static_cast<double>(line.nodes - 1) / 2.0;
    const Lattice lat = build_lattice(
        GridSpec{1, line.h, line.dt, line.dt * static_cast<double>(line.steps), R});
    const auto k = build_kernel(lat, ControlSet::uniform(1, 3, 1.0));
    for (std::size_t c = 0; c < k.controls().size(); ++c)
      line.controls.push_back(k.controls()[c][0]);

    std::vector<double> w(line.nodes);
    double total = 0.0;
    for (auto& v : w) total += (v = g.uniform());
    for (auto& v : w) v /= total;
    const GridMeasure mu(lat.fingerprint(), w);

    const Policy pol = testing::random_policy(g, line.steps, line.nodes, line.controls.size(),
                                              g.uniform(0.0, 0.6));
    std::vector<std::vector<int>> action(line.steps + 1, std::vector<int>(line.nodes, -1));
    for (std::size_t s = 0; s < line.steps; ++s)
      for (std::size_t i = 0; i < line.nodes; ++i) action[s][i] = pol.action(s, i);

    const auto f = forward_propagate(k, pol, mu);
    const auto ref = testing::line_forward(line, action, w);
    EXPECT_LE(f.max_conservation_error, 1e-14);
    EXPECT_NEAR(f.rho.total(), 1.0, 1e-14);
    for (std::size_t s = 0; s <= line.steps; ++s)
      for (std::size_t i = 0; i < line.nodes; ++i) {
        EXPECT_GE(f.eta.alive(s, i), 0.0);
        EXPECT_GE(f.rho.at(s, i), 0.0);
        EXPECT_NEAR(f.eta.alive(s, i), static_cast<double>(ref.alive[s][i]), 1e-14);
        EXPECT_NEAR(f.rho.at(s, i), static_cast<double>(ref.stop[s][i]), 1e-14);
      }
    const double cost = primal_cost(k, line.lagrangian, f.eta);
    EXPECT_NEAR(cost, static_cast<double>(ref.cost), 1e-13);
    EXPECT_TRUE(check_moment_bound(lat, k.controls(), mu, f.rho, cost, line.lagrangian).pass);
  }
}

}  // namespace
}  // namespace freestop
