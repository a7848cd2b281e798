#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsnet/dpe.hpp"
#include "rsnet/game.hpp"
#include "rsnet/rng.hpp"

namespace rsnet {

struct SimConfig {
  int n = 1;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  double horizon_cap = 0.0;  ///< must be positive
  std::size_t workers = 1;
};

/// Generous multiple of the expected exit scale (V + 1)/c.
double horizon_cap_heuristic(double v_hat, double c);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double v_hat = 0.0;  ///< -log(mean)/n
  std::size_t censored = 0;
  std::size_t trials = 0;
  bool degenerate = false;  ///< single trial: no spread information
  /// Censored trials contribute exp(-n c cap), the largest value their
  /// unfinished runs could still produce, so the mean overstates the truth
  /// by at most this amount (and v_hat correspondingly understates).
  double censored_bias_bound = 0.0;
};

/// Stationary Markov allocation: lattice state -> control vector.
using PolicyRule = std::function<ControlVector(const LatticeState&)>;

PolicyRule policy_from_field(const NetworkModel& model, const PolicyField& policy);
PolicyRule never_serve_policy(const NetworkModel& model);
/// Serve per server the nonempty class maximizing mu_i * weight_i
/// (weights default to 1); ties to the lowest class index.
PolicyRule mu_weight_priority_policy(const NetworkModel& model, Vec weights = {});
/// Serve the class whose buffer bound is currently nearest in value terms:
/// the gradient feedback of the closed form evaluated at k/n.
PolicyRule closed_form_policy(const NetworkModel& model, const ClosedFormValue& value,
                              int n);

struct SimEvent {
  LatticeState state;  ///< state the event fired from
  bool is_service = false;
  std::size_t cls = 0;
  double hold = 0.0;  ///< holding time before the event
};

struct ExitSample {
  std::optional<double> sigma;  ///< empty when censored at the horizon cap
};

/// One exit run of the scaled jump chain: exponential clocks with rates
/// n lambda_j (arrivals) and n mu_j u_j (services, silent on empty buffers),
/// stopped when the state leaves G or the clock passes horizon_cap.
ExitSample simulate_exit(const NetworkModel& model, const Domain& domain, int n,
                         const PolicyRule& policy, const LatticeState& x0,
                         CounterRng& rng, double horizon_cap,
                         std::vector<SimEvent>* trace = nullptr);

/// Mean of exp(-n c sigma) over per-trial streams keyed by (seed, trial);
/// pairwise summation keeps the result independent of the worker count.
Estimate estimate_risk_value(const NetworkModel& model, const Domain& domain,
                             const SimConfig& config, const PolicyRule& policy,
                             const LatticeState& x0);

/// Runs every policy on the same per-trial streams (common random numbers).
std::vector<std::pair<std::string, Estimate>> compare_policies(
    const NetworkModel& model, const Domain& domain, const SimConfig& config,
    const std::vector<std::pair<std::string, PolicyRule>>& policies,
    const LatticeState& x0);

}  // namespace rsnet
