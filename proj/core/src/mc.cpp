#include "rsnet/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsnet/parallel.hpp"

namespace rsnet {

namespace {

// Summation tree depends only on the element count, so totals are identical
// however the entries were produced.
double pairwise_sum(const double* v, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, count - half);
}

}  // namespace

double horizon_cap_heuristic(double v_hat, double c) {
  return 10.0 * (v_hat + 1.0) / c;
}

PolicyRule policy_from_field(const NetworkModel& model, const PolicyField& policy) {
  const auto vertices = control_vertices(model);
  auto lattice = policy.lattice;
  auto table = policy.vertex;
  return [lattice, table, vertices](const LatticeState& k) {
    const auto idx = lattice->find(k);
    if (!idx) return vertices[0];  // unreachable before exit; idle defensively
    return vertices[table[*idx]];
  };
}

PolicyRule never_serve_policy(const NetworkModel& model) {
  ControlVector idle;
  idle.u.assign(model.num_classes, 0.0);
  return [idle](const LatticeState&) { return idle; };
}

PolicyRule mu_weight_priority_policy(const NetworkModel& model, Vec weights) {
  if (weights.empty()) weights.assign(model.num_classes, 1.0);
  if (weights.size() != model.num_classes)
    throw std::invalid_argument("mu_weight_priority_policy: wrong dimension");
  const NetworkModel m = model;
  const Vec w = std::move(weights);
  return [m, w](const LatticeState& k) {
    ControlVector out;
    out.u.assign(m.num_classes, 0.0);
    for (std::size_t srv = 0; srv < m.num_servers; ++srv) {
      double best = 0.0;
      std::size_t pick = m.num_classes;
      for (std::size_t i : m.serves[srv]) {
        if (k[i] <= 0) continue;
        const double score = m.mu[i] * w[i];
        if (score > best) {
          best = score;
          pick = i;
        }
      }
      if (pick < m.num_classes) out.u[pick] = 1.0;
    }
    return out;
  };
}

PolicyRule closed_form_policy(const NetworkModel& model, const ClosedFormValue& value,
                              int n) {
  const NetworkModel m = model;
  const ClosedFormValue v = value;
  const double dn = static_cast<double>(n);
  return [m, v, dn](const LatticeState& k) {
    Vec x(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) x[i] = static_cast<double>(k[i]) / dn;
    return gradient_feedback(m, v.gradient_at(x));
  };
}

Estimate estimate_risk_value(const NetworkModel& model, const Domain& domain,
                             const SimConfig& config, const PolicyRule& policy,
                             const LatticeState& x0) {
  if (config.trials == 0)
    throw std::invalid_argument("estimate_risk_value: zero trials");
  if (!(config.horizon_cap > 0.0))
    throw std::invalid_argument("estimate_risk_value: horizon_cap must be positive");
  if (!lattice_in_domain(model, domain, x0, config.n))
    throw std::invalid_argument("estimate_risk_value: start state outside G");

  const double n = static_cast<double>(config.n);
  const double censored_value = std::exp(-n * model.c * config.horizon_cap);

  std::vector<double> y(config.trials);
  std::vector<unsigned char> was_censored(config.trials, 0);
  parallel_for(config.trials, config.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      CounterRng rng(config.seed, t);
      const ExitSample s = simulate_exit(model, domain, config.n, policy, x0, rng,
                                         config.horizon_cap, nullptr);
      if (s.sigma) {
        y[t] = std::exp(-n * model.c * *s.sigma);
      } else {
        y[t] = censored_value;
        was_censored[t] = 1;
      }
    }
  });

  Estimate est;
  est.trials = config.trials;
  for (unsigned char f : was_censored) est.censored += f;
  est.mean =
      pairwise_sum(y.data(), y.size()) / static_cast<double>(config.trials);
  if (config.trials == 1) {
    est.degenerate = true;
    est.std_error = 0.0;
  } else {
    std::vector<double> sq(config.trials);
    for (std::size_t t = 0; t < config.trials; ++t) {
      const double d = y[t] - est.mean;
      sq[t] = d * d;
    }
    est.std_error = std::sqrt(pairwise_sum(sq.data(), sq.size()) /
                              (static_cast<double>(config.trials) *
                               static_cast<double>(config.trials - 1)));
  }
  est.v_hat = -std::log(est.mean) / n;
  est.censored_bias_bound =
      static_cast<double>(est.censored) / static_cast<double>(config.trials) *
      censored_value;
  return est;
}

std::vector<std::pair<std::string, Estimate>> compare_policies(
    const NetworkModel& model, const Domain& domain, const SimConfig& config,
    const std::vector<std::pair<std::string, PolicyRule>>& policies,
    const LatticeState& x0) {
  std::vector<std::pair<std::string, Estimate>> out;
  out.reserve(policies.size());
  for (const auto& [name, rule] : policies)
    out.emplace_back(name, estimate_risk_value(model, domain, config, rule, x0));
  return out;
}

ExitSample simulate_exit(const NetworkModel& model, const Domain& domain, int n,
                         const PolicyRule& policy, const LatticeState& x0,
                         CounterRng& rng, double horizon_cap,
                         std::vector<SimEvent>* trace) {
  if (!(horizon_cap > 0.0))
    throw std::invalid_argument("simulate_exit: horizon_cap must be positive");
  if (!lattice_in_domain(model, domain, x0, n))
    throw std::invalid_argument("simulate_exit: start state outside G");

  const std::size_t J = model.num_classes;
  const double dn = static_cast<double>(n);
  LatticeState k = x0;
  double t = 0.0;
  Vec rates(2 * J);  // arrivals then services, fixed order for determinism

  while (true) {
    const ControlVector u = policy(k);
    double total = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      rates[j] = dn * model.lambda[j];
      total += rates[j];
    }
    for (std::size_t j = 0; j < J; ++j) {
      rates[J + j] = (k[j] > 0) ? dn * model.mu[j] * u.u[j] : 0.0;
      total += rates[J + j];
    }
    if (!(total > 0.0)) return ExitSample{std::nullopt};  // frozen: censor

    const double hold = rng.exponential(total);
    if (t + hold > horizon_cap) return ExitSample{std::nullopt};
    t += hold;

    double pick = rng.uniform01() * total;
    std::size_t event = 0;
    for (; event + 1 < 2 * J; ++event) {
      if (pick <= rates[event] || rates[event] == total) break;
      pick -= rates[event];
    }
    // Guard against roundoff landing on a zero-rate slot.
    while (rates[event] == 0.0 && event > 0) --event;

    if (trace) {
      SimEvent ev;
      ev.state = k;
      ev.is_service = event >= J;
      ev.cls = event % J;
      ev.hold = hold;
      trace->push_back(ev);
    }

    if (event < J) {
      k[event] += 1;
    } else {
      const std::size_t j = event - J;
      k[j] -= 1;
      if (model.route[j] != kExit) k[static_cast<std::size_t>(model.route[j])] += 1;
    }
    if (!lattice_in_domain(model, domain, k, n)) return ExitSample{t};
  }
}

}  // namespace rsnet
