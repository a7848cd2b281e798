#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rsnet/network.hpp"

namespace rsnet {

/// Piecewise-linear path sampled on a strictly increasing time grid.
struct Path {
  std::vector<double> times;
  std::vector<Vec> values;

  std::size_t size() const { return times.size(); }
};

/// Class order in which every class precedes its route successor.
/// Deterministic: among the ready classes the lowest index goes first.
std::vector<std::size_t> topological_order(const NetworkModel& model);

/// Applies one increment to x and resolves the nonnegativity constraints by
/// pushing along the reflection direction of each violated class (+1 on the
/// class, -1 on its route successor). One sweep in `order` suffices because
/// pushes only propagate downstream. If `push` is non-null the per-class push
/// amounts are accumulated into it.
Vec reflect_step(const NetworkModel& model, const std::vector<std::size_t>& order,
                 const Vec& x, const Vec& delta, Vec* push = nullptr);

/// Directional derivative of the constrained dynamics: the velocity the
/// reflected path actually follows at x when the free velocity is v.
Vec projected_velocity(const NetworkModel& model, const Vec& x, const Vec& v);

struct ReflectionOutput {
  Path phi;  ///< constrained path, same grid as the input
  Path eta;  ///< cumulative per-class push amounts; componentwise nondecreasing
  std::vector<std::size_t> push_order;  ///< class order used by the sweeps
};

/// Constrained version of psi: phi = psi + sum_j eta_j * gamma_j with
/// gamma_j = e_j - e_{route(j)}, phi >= 0, eta_j flat while phi_j > 0.
ReflectionOutput skorokhod_map(const NetworkModel& model, const Path& psi);

/// Integrates the constrained dynamics dx = (projected) velocity dt on a
/// uniform grid of step dt up to `horizon`. Equivalent to reflecting the
/// accumulated free motion step by step; agrees with forward Euler on
/// projected_velocity to O(dt).
Path integrate_constrained_ode(const NetworkModel& model, const Vec& x0,
                               const std::function<Vec(double)>& velocity,
                               double dt, double horizon);

struct SpCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;      ///< largest violation found
  std::size_t at_step = 0; ///< grid index of the worst violation
};

struct SpCheckReport {
  std::vector<SpCheck> checks;
  bool all_passed() const;
};

/// Named diagnostics for a claimed solution of the reflection problem:
/// reconstruction (phi = psi + sum eta_j gamma_j), nonnegativity of phi,
/// monotonicity of eta, and complementarity (eta_j grows only while
/// phi_j sits at zero).
SpCheckReport verify_sp_solution(const NetworkModel& model, const Path& psi,
                                 const Path& phi, const Path& eta, double tol);

}  // namespace rsnet
