#include "rsnet/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsnet/rng.hpp"

namespace rsnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double route_gradient(const NetworkModel& m, const Vec& q, std::size_t i) {
  // <q, e_{route(i)} - e_i> with q_{exit} = 0.
  const int r = m.route[i];
  const double qr = (r == kExit) ? 0.0 : q[static_cast<std::size_t>(r)];
  return qr - q[i];
}

/// Value of the exchange at q when the rate player fixes `rates` and the
/// allocation replies optimally: c plus the arrival part plus, per server,
/// the best nonnegative service advantage.
double exchange_at(const NetworkModel& m, const Vec& q, const RatePerturbation& rates) {
  double total = m.c;
  for (std::size_t j = 0; j < m.num_classes; ++j) {
    if (m.lambda[j] > 0.0) {
      total += rates.lam_bar[j] * q[j] +
               m.lambda[j] * rate_divergence(rates.lam_bar[j] / m.lambda[j]);
    } else if (rates.lam_bar[j] > 0.0) {
      return kInf;
    }
  }
  for (std::size_t k = 0; k < m.num_servers; ++k) {
    double best = 0.0;
    for (std::size_t i : m.serves[k]) {
      const double s = rates.mu_bar[i] * route_gradient(m, q, i) +
                       m.mu[i] * rate_divergence(rates.mu_bar[i] / m.mu[i]);
      best = std::max(best, s);
    }
    total += best;
  }
  return total;
}

}  // namespace

double rate_divergence(double x) {
  if (x < 0.0) return kInf;
  if (x == 0.0) return 1.0;
  return x * std::log(x) - x + 1.0;
}

double running_cost(const NetworkModel& m, const ControlVector& u,
                    const RatePerturbation& rates) {
  const std::size_t J = m.num_classes;
  if (u.u.size() != J || rates.lam_bar.size() != J || rates.mu_bar.size() != J)
    throw std::invalid_argument("running_cost: wrong dimension");
  double total = 0.0;
  for (std::size_t i = 0; i < J; ++i) {
    if (m.lambda[i] > 0.0) {
      total += m.lambda[i] * rate_divergence(rates.lam_bar[i] / m.lambda[i]);
    } else if (rates.lam_bar[i] > 0.0) {
      return kInf;  // cannot conjure arrivals for a class that has none
    }
    if (u.u[i] > 0.0)
      total += u.u[i] * m.mu[i] * rate_divergence(rates.mu_bar[i] / m.mu[i]);
  }
  return total;
}

Vec drift(const NetworkModel& m, const ControlVector& u, const RatePerturbation& rates) {
  const std::size_t J = m.num_classes;
  if (u.u.size() != J || rates.lam_bar.size() != J || rates.mu_bar.size() != J)
    throw std::invalid_argument("drift: wrong dimension");
  Vec v(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) v[j] += rates.lam_bar[j];
  for (std::size_t i = 0; i < J; ++i) {
    const double flow = u.u[i] * rates.mu_bar[i];
    if (flow == 0.0) continue;
    v[i] -= flow;
    if (m.route[i] != kExit) v[static_cast<std::size_t>(m.route[i])] += flow;
  }
  return v;
}

RatePerturbation inner_min_rates(const NetworkModel& m, const Vec& q,
                                 std::optional<double> cap) {
  const std::size_t J = m.num_classes;
  if (q.size() != J) throw std::invalid_argument("inner_min_rates: wrong dimension");
  RatePerturbation out;
  out.lam_bar.assign(J, 0.0);
  out.mu_bar.assign(J, 0.0);
  out.cap = cap;
  for (std::size_t j = 0; j < J; ++j) {
    // Tilted rates: exponential in the gradient seen along each jump.
    out.lam_bar[j] = m.lambda[j] > 0.0 ? m.lambda[j] * std::exp(-q[j]) : 0.0;
    out.mu_bar[j] = m.mu[j] * std::exp(-route_gradient(m, q, j));
    if (cap) {
      out.lam_bar[j] = std::min(out.lam_bar[j], *cap);
      out.mu_bar[j] = std::min(out.mu_bar[j], *cap);
    }
  }
  return out;
}

double hamiltonian(const NetworkModel& m, const Vec& q) {
  const std::size_t J = m.num_classes;
  if (q.size() != J) throw std::invalid_argument("hamiltonian: wrong dimension");
  double total = m.c;
  for (std::size_t j = 0; j < J; ++j)
    if (m.lambda[j] > 0.0) total += m.lambda[j] * (1.0 - std::exp(-q[j]));
  for (std::size_t k = 0; k < m.num_servers; ++k) {
    double best = 0.0;
    for (std::size_t i : m.serves[k])
      best = std::max(best, m.mu[i] * (1.0 - std::exp(-route_gradient(m, q, i))));
    total += best;
  }
  return total;
}

ControlVector gradient_feedback(const NetworkModel& m, const Vec& q) {
  const std::size_t J = m.num_classes;
  if (q.size() != J) throw std::invalid_argument("gradient_feedback: wrong dimension");
  ControlVector out;
  out.u.assign(J, 0.0);
  for (std::size_t k = 0; k < m.num_servers; ++k) {
    double best = 0.0;  // idling is worth exactly zero
    std::size_t pick = J;
    for (std::size_t i : m.serves[k]) {
      const double adv = m.mu[i] * (1.0 - std::exp(-route_gradient(m, q, i)));
      if (adv > best) {  // strict: ties resolve to the earliest candidate
        best = adv;
        pick = i;
      }
    }
    if (pick < J) out.u[pick] = 1.0;
  }
  return out;
}

RateGridSpec refine(const RateGridSpec& grid) {
  return RateGridSpec{grid.bound, 2 * grid.points_per_axis - 1};
}

double rate_bound_heuristic(const NetworkModel& m, double q_max) {
  double b = 0.0;
  for (std::size_t i = 0; i < m.num_classes; ++i) {
    b = std::max(b, m.lambda[i] * std::exp(q_max));
    // Route gradients span twice the coordinate range.
    b = std::max(b, m.mu[i] * std::exp(2.0 * q_max));
  }
  return b + 1.0;
}

IsaacsGapResult isaacs_gap(const NetworkModel& m, const Vec& q,
                           const RateGridSpec& grid) {
  const std::size_t J = m.num_classes;
  if (q.size() != J) throw std::invalid_argument("isaacs_gap: wrong dimension");
  if (!(grid.bound > 0.0) || grid.points_per_axis < 2)
    throw std::invalid_argument("isaacs_gap: empty grid");

  const std::size_t P = grid.points_per_axis;
  const double spacing = grid.bound / static_cast<double>(P - 1);
  auto grid_value = [&](std::size_t t) { return spacing * static_cast<double>(t); };

  // Minimum over the full product grid. The objective splits into a sum of
  // one-coordinate arrival terms plus per-server maxima of one-coordinate
  // service terms; since a maximum is nondecreasing in each argument, every
  // coordinate can be minimized on its own axis and the combined minimum
  // equals the product-grid minimum exactly.
  double inf_sup = m.c;
  for (std::size_t j = 0; j < J; ++j) {
    if (!(m.lambda[j] > 0.0)) continue;  // pinned at zero, contributes nothing
    double best = kInf;
    for (std::size_t t = 0; t < P; ++t) {
      const double g = grid_value(t);
      best = std::min(best, g * q[j] + m.lambda[j] * rate_divergence(g / m.lambda[j]));
    }
    inf_sup += best;
  }
  for (std::size_t k = 0; k < m.num_servers; ++k) {
    double server_best = 0.0;
    for (std::size_t i : m.serves[k]) {
      const double dq = route_gradient(m, q, i);
      double best = kInf;
      for (std::size_t t = 0; t < P; ++t) {
        const double g = grid_value(t);
        best = std::min(best, g * dq + m.mu[i] * rate_divergence(g / m.mu[i]));
      }
      server_best = std::max(server_best, best);
    }
    inf_sup += server_best;
  }

  IsaacsGapResult out;
  out.inf_sup = inf_sup;
  out.sup_inf = hamiltonian(m, q);
  out.gap = out.inf_sup - out.sup_inf;

  // Certificate: the grid minimum can never exceed the exchange value at the
  // grid point nearest the analytic minimizer, so that value bounds the gap.
  RatePerturbation nearest = inner_min_rates(m, q);
  auto snap = [&](double v) {
    const double t = std::round(std::min(std::max(v, 0.0), grid.bound) / spacing);
    return spacing * t;
  };
  for (std::size_t j = 0; j < J; ++j) {
    nearest.lam_bar[j] = m.lambda[j] > 0.0 ? snap(nearest.lam_bar[j]) : 0.0;
    nearest.mu_bar[j] = snap(nearest.mu_bar[j]);
  }
  out.declared_tol = exchange_at(m, q, nearest) - out.sup_inf + 1e-12;
  return out;
}

GameCost trajectory_cost(const NetworkModel& m, const Domain& domain, const Vec& x0,
                         const std::function<ControlVector(double)>& control,
                         const std::function<RatePerturbation(double)>& rates,
                         double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("trajectory_cost: dt and horizon must be positive");
  if (!in_domain(classify_point(m, domain, x0)))
    throw std::invalid_argument("trajectory_cost: start point outside the domain");

  const std::size_t J = m.num_classes;
  const auto order = topological_order(m);
  GameCost out;
  Vec x = x0;
  double t = 0.0;
  Vec delta(J);
  while (t < horizon) {
    const double step = std::min(dt, horizon - t);
    const ControlVector u = control(t);
    const RatePerturbation pert = rates(t);
    const Vec v = drift(m, u, pert);
    const double rho = running_cost(m, u, pert);

    for (std::size_t i = 0; i < J; ++i) delta[i] = v[i] * step;
    const Vec next = reflect_step(m, order, x, delta, nullptr);
    if (!in_domain(classify_point(m, domain, next))) {
      // The crossing lies inside this step; 20 halvings pin it to step/2^20.
      double lo = 0.0, hi = 1.0;
      for (int iter = 0; iter < 20; ++iter) {
        const double mid = 0.5 * (lo + hi);
        for (std::size_t i = 0; i < J; ++i) delta[i] = v[i] * (mid * step);
        const Vec probe = reflect_step(m, order, x, delta, nullptr);
        if (in_domain(classify_point(m, domain, probe))) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      for (std::size_t i = 0; i < J; ++i) delta[i] = v[i] * (hi * step);
      const Vec exit_point = reflect_step(m, order, x, delta, nullptr);
      out.sigma = t + hi * step;
      out.cost += (m.c + rho) * (hi * step);
      out.exited_through = classify_point(m, domain, exit_point);
      return out;
    }
    out.cost += (m.c + rho) * step;
    x = next;
    t += step;
  }
  out.sigma = std::nullopt;
  out.exited_through = classify_point(m, domain, x);
  return out;
}

double ClosedFormValue::evaluate(const Vec& x) const {
  if (x.size() != alpha.size())
    throw std::invalid_argument("ClosedFormValue: wrong dimension");
  double best = kInf;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    best = std::min(best, alpha[i] * (z[i] - x[i]));
  return best;
}

std::size_t ClosedFormValue::active_index(const Vec& x) const {
  if (x.size() != alpha.size())
    throw std::invalid_argument("ClosedFormValue: wrong dimension");
  std::size_t pick = 0;
  double best = alpha[0] * (z[0] - x[0]);
  for (std::size_t i = 1; i < alpha.size(); ++i) {
    const double v = alpha[i] * (z[i] - x[i]);
    if (v < best) {
      best = v;
      pick = i;
    }
  }
  return pick;
}

Vec ClosedFormValue::gradient_at(const Vec& x) const {
  Vec q(alpha.size(), 0.0);
  const std::size_t i = active_index(x);
  q[i] = -alpha[i];
  return q;
}

ClosedFormValue competing_queues_value(const NetworkModel& m, const Domain& domain) {
  const std::size_t J = m.num_classes;
  if (m.num_servers != 1)
    throw std::invalid_argument("competing_queues_value: needs a single server");
  for (std::size_t i = 0; i < J; ++i) {
    if (m.route[i] != kExit)
      throw std::invalid_argument("competing_queues_value: every class must exit");
    if (!(m.lambda[i] > 0.0))
      throw std::invalid_argument(
          "competing_queues_value: every class needs arrivals");
  }
  if (domain.kind != Domain::Kind::Rect)
    throw std::invalid_argument("competing_queues_value: needs a rectangle domain");

  ClosedFormValue out;
  out.alpha.resize(J);
  out.z = domain.z;
  out.c = m.c;
  for (std::size_t i = 0; i < J; ++i) {
    const double lam = m.lambda[i];
    const double mu = m.mu[i];
    const double s = lam + mu + m.c;
    // Larger root of lam t^2 - s t + mu = 0; adding the square root avoids
    // cancellation, and the root exceeds 1 because c > 0.
    double t = (s + std::sqrt(s * s - 4.0 * lam * mu)) / (2.0 * lam);
    for (int polish = 0; polish < 2; ++polish)
      t -= (lam * t * t - s * t + mu) / (2.0 * lam * t - s);
    out.alpha[i] = std::log(t);
  }
  return out;
}

double competing_alpha_bisect(double lambda, double mu, double c) {
  const double target = 1.0 + c / (lambda + mu);
  auto f = [&](double a) {
    return (lambda * std::exp(a) + mu * std::exp(-a)) / (lambda + mu) - target;
  };
  double lo = 1e-8, hi = 50.0;
  if (!(f(lo) < 0.0) || !(f(hi) > 0.0))
    throw std::domain_error("competing_alpha_bisect: root not bracketed");
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ScanResult subsolution_scan(const ClosedFormValue& value, const NetworkModel& m,
                            std::size_t samples, std::uint64_t seed) {
  if (samples == 0)
    throw std::invalid_argument("subsolution_scan: zero samples");
  const std::size_t J = m.num_classes;
  if (value.alpha.size() != J)
    throw std::invalid_argument("subsolution_scan: wrong dimension");

  std::vector<Vec> points;
  points.reserve(samples);
  points.emplace_back(J, 0.0);  // origin first
  for (std::size_t i = 0; i < J && points.size() < samples; ++i) {
    Vec e(J, 0.0);
    e[i] = 1.0;
    points.push_back(std::move(e));
  }
  CounterRng rng(seed, 0);
  while (points.size() < samples) {
    // J+1 unit exponentials normalized: uniform over {nu >= 0, sum <= 1}.
    Vec e(J + 1);
    double total = 0.0;
    for (double& v : e) {
      v = rng.exponential(1.0);
      total += v;
    }
    Vec nu(J);
    for (std::size_t i = 0; i < J; ++i) nu[i] = e[i + 1] / total;
    points.push_back(std::move(nu));
  }

  ScanResult out;
  out.min_h = kInf;
  out.samples.reserve(points.size());
  Vec q(J);
  for (const Vec& nu : points) {
    for (std::size_t i = 0; i < J; ++i) q[i] = -nu[i] * value.alpha[i];
    const double h = hamiltonian(m, q);
    out.samples.push_back(ScanSample{nu, h});
    if (h < out.min_h) {
      out.min_h = h;
      out.argmin_nu = nu;
    }
  }
  return out;
}

}  // namespace rsnet
