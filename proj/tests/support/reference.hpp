#pragma once

// Independent d = 1 reference implementations used as test oracles. They
// rebuild the chain from the closed-form upwind probabilities and never call
// the library's kernel, recursion or propagation code.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "freestop/model.hpp"

namespace freestop::testing {

struct Line {
  std::size_t nodes = 3;
  double h = 1.0;
  double dt = 0.25;
  std::size_t steps = 1;
  std::vector<double> controls;
  LagrangianSpec lagrangian;

  double x(std::size_t i) const {
    return -h * static_cast<double>(nodes - 1) / 2.0 + h * static_cast<double>(i);
  }
  double t(std::size_t k) const { return dt * static_cast<double>(k); }
};

/// Transition probabilities out of node i under drift u, with mass that would
/// leave the box kept on the departing node.
inline std::vector<long double> line_row(const Line& g, std::size_t i, double u) {
  std::vector<long double> row(g.nodes, 0.0L);
  const long double diff = static_cast<long double>(g.dt) / (2.0L * g.h * g.h);
  const long double up = diff + g.dt * std::max(u, 0.0) / g.h;
  const long double down = diff + g.dt * std::max(-u, 0.0) / g.h;
  row[i] += 1.0L - up - down;
  row[i + 1 < g.nodes ? i + 1 : i] += up;
  row[i > 0 ? i - 1 : i] += down;
  return row;
}

struct LineSolution {
  std::vector<std::vector<long double>> value;  // [k][i]
  std::vector<std::vector<int>> action;         // -1 stop, else control index
};

/// Backward recursion with stop on ties within `tie`.
inline LineSolution line_qvi(const Line& g, const std::vector<double>& psi, double tie = 1e-12) {
  LineSolution s;
  s.value.assign(g.steps + 1, std::vector<long double>(g.nodes, 0.0L));
  s.action.assign(g.steps + 1, std::vector<int>(g.nodes, -1));
  for (std::size_t i = 0; i < g.nodes; ++i) s.value[g.steps][i] = psi[i];
  for (std::size_t k = g.steps; k-- > 0;) {
    for (std::size_t i = 0; i < g.nodes; ++i) {
      long double best = 0.0L;
      int arg = -1;
      for (std::size_t c = 0; c < g.controls.size(); ++c) {
        const auto row = line_row(g, i, g.controls[c]);
        long double cont = -static_cast<long double>(
            eval_lagrangian(g.lagrangian, g.t(k), Point{g.x(i)}, Point{g.controls[c]}) * g.dt);
        for (std::size_t j = 0; j < g.nodes; ++j) cont += row[j] * s.value[k + 1][j];
        if (arg < 0 || cont > best) {
          best = cont;
          arg = static_cast<int>(c);
        }
      }
      if (psi[i] >= best - tie) {
        s.value[k][i] = psi[i];
        s.action[k][i] = -1;
      } else {
        s.value[k][i] = best;
        s.action[k][i] = arg;
      }
    }
  }
  return s;
}

struct LineForward {
  std::vector<std::vector<long double>> alive;  // [k][i]
  std::vector<std::vector<long double>> stop;   // [k][i]
  long double cost = 0.0L;
};

inline LineForward line_forward(const Line& g, const std::vector<std::vector<int>>& action,
                                const std::vector<double>& mu) {
  LineForward f;
  f.alive.assign(g.steps + 1, std::vector<long double>(g.nodes, 0.0L));
  f.stop.assign(g.steps + 1, std::vector<long double>(g.nodes, 0.0L));
  for (std::size_t i = 0; i < g.nodes; ++i) f.alive[0][i] = mu[i];
  for (std::size_t k = 0; k <= g.steps; ++k)
    for (std::size_t i = 0; i < g.nodes; ++i) {
      const long double m = f.alive[k][i];
      if (k == g.steps || action[k][i] < 0) {
        f.stop[k][i] += m;
        continue;
      }
      const double u = g.controls[static_cast<std::size_t>(action[k][i])];
      f.cost += m * eval_lagrangian(g.lagrangian, g.t(k), Point{g.x(i)}, Point{u}) * g.dt;
      const auto row = line_row(g, i, u);
      for (std::size_t j = 0; j < g.nodes; ++j) f.alive[k + 1][j] += row[j] * m;
    }
  return f;
}

}  // namespace freestop::testing
