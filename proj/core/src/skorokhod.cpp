#include "rsnet/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsnet {

std::vector<std::size_t> topological_order(const NetworkModel& m) {
  const std::size_t J = m.num_classes;
  std::vector<std::size_t> indeg(J, 0);
  for (std::size_t i = 0; i < J; ++i)
    if (m.route[i] != kExit) ++indeg[static_cast<std::size_t>(m.route[i])];

  std::vector<std::size_t> order;
  order.reserve(J);
  std::vector<bool> placed(J, false);
  for (std::size_t step = 0; step < J; ++step) {
    std::size_t pick = J;
    for (std::size_t i = 0; i < J; ++i) {
      if (!placed[i] && indeg[i] == 0) {
        pick = i;
        break;  // lowest ready index first
      }
    }
    if (pick == J)
      throw std::invalid_argument("topological_order: cyclic routing");
    placed[pick] = true;
    order.push_back(pick);
    if (m.route[pick] != kExit) --indeg[static_cast<std::size_t>(m.route[pick])];
  }
  return order;
}

Vec reflect_step(const NetworkModel& m, const std::vector<std::size_t>& order,
                 const Vec& x, const Vec& delta, Vec* push) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + delta[i];
  for (std::size_t j : order) {
    if (y[j] < 0.0) {
      const double a = -y[j];
      y[j] = 0.0;
      if (m.route[j] != kExit) y[static_cast<std::size_t>(m.route[j])] -= a;
      if (push) (*push)[j] += a;
    }
  }
  return y;
}

Vec projected_velocity(const NetworkModel& m, const Vec& x, const Vec& v) {
  const std::size_t J = m.num_classes;
  if (x.size() != J || v.size() != J)
    throw std::invalid_argument("projected_velocity: wrong dimension");
  for (double xi : x)
    if (xi < -kActiveTol)
      throw std::domain_error("projected_velocity: point outside the orthant");

  const auto order = topological_order(m);
  Vec w = v;
  for (std::size_t j : order) {
    // Only constraints the point actually sits on can push.
    if (x[j] <= kActiveTol && w[j] < 0.0) {
      const double a = -w[j];
      w[j] = 0.0;
      if (m.route[j] != kExit) w[static_cast<std::size_t>(m.route[j])] -= a;
    }
  }
  return w;
}

ReflectionOutput skorokhod_map(const NetworkModel& m, const Path& psi) {
  const std::size_t J = m.num_classes;
  if (psi.size() == 0) throw std::invalid_argument("skorokhod_map: empty path");
  if (psi.values.size() != psi.times.size())
    throw std::invalid_argument("skorokhod_map: times/values size mismatch");
  for (std::size_t k = 1; k < psi.size(); ++k)
    if (!(psi.times[k] > psi.times[k - 1]))
      throw std::invalid_argument("skorokhod_map: time grid not increasing");
  if (psi.values[0].size() != J)
    throw std::invalid_argument("skorokhod_map: wrong dimension");
  for (double v : psi.values[0])
    if (v < 0.0)
      throw std::domain_error("skorokhod_map: start point outside the orthant");

  ReflectionOutput out;
  out.push_order = topological_order(m);
  out.phi.times = psi.times;
  out.eta.times = psi.times;
  out.phi.values.resize(psi.size());
  out.eta.values.resize(psi.size());
  out.phi.values[0] = psi.values[0];
  out.eta.values[0].assign(J, 0.0);

  Vec delta(J);
  for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
    for (std::size_t i = 0; i < J; ++i)
      delta[i] = psi.values[k + 1][i] - psi.values[k][i];
    out.eta.values[k + 1] = out.eta.values[k];
    out.phi.values[k + 1] = reflect_step(m, out.push_order, out.phi.values[k],
                                         delta, &out.eta.values[k + 1]);
  }
  return out;
}

Path integrate_constrained_ode(const NetworkModel& m, const Vec& x0,
                               const std::function<Vec(double)>& velocity,
                               double dt, double horizon) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_constrained_ode: dt <= 0");
  if (!(horizon > 0.0))
    throw std::invalid_argument("integrate_constrained_ode: horizon <= 0");
  const std::size_t J = m.num_classes;
  if (x0.size() != J)
    throw std::invalid_argument("integrate_constrained_ode: wrong dimension");
  for (double v : x0)
    if (v < 0.0)
      throw std::domain_error("integrate_constrained_ode: start outside the orthant");

  const auto order = topological_order(m);
  Path phi;
  phi.times.push_back(0.0);
  phi.values.push_back(x0);
  double t = 0.0;
  Vec delta(J);
  while (t < horizon) {
    const double step = std::min(dt, horizon - t);
    const Vec v = velocity(t);  // step function, left endpoint
    for (std::size_t i = 0; i < J; ++i) delta[i] = v[i] * step;
    phi.values.push_back(reflect_step(m, order, phi.values.back(), delta, nullptr));
    t += step;
    phi.times.push_back(t);
  }
  return phi;
}

bool SpCheckReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const SpCheck& c) { return c.passed; });
}

SpCheckReport verify_sp_solution(const NetworkModel& m, const Path& psi,
                                 const Path& phi, const Path& eta, double tol) {
  const std::size_t J = m.num_classes;
  if (psi.size() != phi.size() || psi.size() != eta.size() || psi.size() == 0)
    throw std::invalid_argument("verify_sp_solution: mismatched grids");
  for (std::size_t k = 0; k < psi.size(); ++k)
    if (psi.times[k] != phi.times[k] || psi.times[k] != eta.times[k])
      throw std::invalid_argument("verify_sp_solution: mismatched grids");

  SpCheckReport rep;
  SpCheck recon{"reconstruction", true, 0.0, 0};
  SpCheck nonneg{"nonnegativity", true, 0.0, 0};
  SpCheck mono{"monotonicity", true, 0.0, 0};
  SpCheck compl_{"complementarity", true, 0.0, 0};

  auto track = [](SpCheck& c, double violation, std::size_t step) {
    if (violation > c.worst) {
      c.worst = violation;
      c.at_step = step;
    }
  };

  for (std::size_t k = 0; k < psi.size(); ++k) {
    // phi = psi + sum_j eta_j (e_j - e_{route(j)})
    Vec rec = psi.values[k];
    for (std::size_t j = 0; j < J; ++j) {
      const double a = eta.values[k][j];
      rec[j] += a;
      if (m.route[j] != kExit) rec[static_cast<std::size_t>(m.route[j])] -= a;
    }
    for (std::size_t i = 0; i < J; ++i)
      track(recon, std::fabs(phi.values[k][i] - rec[i]), k);

    for (std::size_t i = 0; i < J; ++i) track(nonneg, -phi.values[k][i], k);

    if (k == 0) {
      for (std::size_t j = 0; j < J; ++j) track(mono, std::fabs(eta.values[0][j]), 0);
    } else {
      for (std::size_t j = 0; j < J; ++j) {
        const double inc = eta.values[k][j] - eta.values[k - 1][j];
        track(mono, -inc, k);
        // A growing eta_j must find phi_j on the constraint at the step end.
        if (inc > tol) track(compl_, phi.values[k][j], k);
      }
    }
  }

  for (SpCheck* c : {&recon, &nonneg, &mono, &compl_}) {
    c->passed = c->worst <= tol;
    rep.checks.push_back(*c);
  }
  return rep;
}

}  // namespace rsnet
