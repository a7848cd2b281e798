#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rsnet/network.hpp"
#include "rsnet/skorokhod.hpp"

namespace rsnet {

/// x log x - x + 1 with 0 log 0 = 0; +inf for x < 0. Convex, zero exactly
/// at x = 1. Per-unit-rate price of bending a Poisson stream.
double rate_divergence(double x);

/// Instantaneous price the rate player pays for running (lam_bar, mu_bar)
/// instead of the nominal rates, given the allocation u. Infinite when a
/// class without arrivals is assigned a positive arrival rate.
double running_cost(const NetworkModel& model, const ControlVector& u,
                    const RatePerturbation& rates);

/// Mean state velocity under (u, rates): arrivals push +e_j, a served class
/// moves one customer from itself to its route successor.
Vec drift(const NetworkModel& model, const ControlVector& u,
          const RatePerturbation& rates);

/// Rates minimizing <q, drift> + running cost; independent of the
/// allocation. Componentwise clamped to [0, cap] when a cap is given.
RatePerturbation inner_min_rates(const NetworkModel& model, const Vec& q,
                                 std::optional<double> cap = std::nullopt);

/// Value of the one-shot rate-vs-allocation exchange at gradient q:
/// c + sum_j lambda_j (1 - e^{-q_j})
///   + sum_k max(0, max_{i in serves[k]} mu_i (1 - e^{q_i - q_{route(i)}})),
/// with q_{exit} = 0. Both play orders give this number.
double hamiltonian(const NetworkModel& model, const Vec& q);

/// Allocation maximizing the exchange at q: each server gives full effort to
/// its best positive-advantage class, else idles. Ties go to the lowest
/// class index.
ControlVector gradient_feedback(const NetworkModel& model, const Vec& q);

/// Uniform grid {0, b/(p-1), ..., b} used per active rate coordinate.
struct RateGridSpec {
  double bound = 0.0;
  std::size_t points_per_axis = 0;
};

/// Same bound, halved spacing; the refined grid contains the coarse one.
RateGridSpec refine(const RateGridSpec& grid);

/// Bound comfortably covering every minimizing rate for |q_i| <= q_max.
double rate_bound_heuristic(const NetworkModel& model, double q_max);

struct IsaacsGapResult {
  double inf_sup = 0.0;       ///< rate player commits first, rates on the grid
  double sup_inf = 0.0;       ///< closed form (allocation commits first)
  double gap = 0.0;           ///< inf_sup - sup_inf, >= 0 up to roundoff
  double declared_tol = 0.0;  ///< certified bound: exchange value at the
                              ///< grid point nearest the analytic minimizer
};

/// Compares the two play orders at q, the first discretized over the grid
/// (classes without arrivals keep their arrival rate pinned at zero).
IsaacsGapResult isaacs_gap(const NetworkModel& model, const Vec& q,
                           const RateGridSpec& grid);

struct GameCost {
  std::optional<double> sigma;  ///< exit time; empty when the horizon ran out
  double cost = 0.0;            ///< integral of c + running cost up to sigma
  BoundaryClass exited_through = BoundaryClass::Interior;
};

/// Runs the constrained dynamics under time-dependent (u, rates) from x0
/// until the state leaves G, the crossing located by bisection inside the
/// step. Cost integrates by the left-endpoint rule.
GameCost trajectory_cost(const NetworkModel& model, const Domain& domain,
                         const Vec& x0,
                         const std::function<ControlVector(double)>& control,
                         const std::function<RatePerturbation(double)>& rates,
                         double dt, double horizon);

/// min_i alpha_i (z_i - x_i): the game value for parallel queues competing
/// for one server inside a rectangle, every class with arrivals and exiting
/// directly.
struct ClosedFormValue {
  Vec alpha;
  Vec z;
  double c = 0.0;

  double evaluate(const Vec& x) const;
  /// argmin of alpha_i (z_i - x_i); ties to the lowest index.
  std::size_t active_index(const Vec& x) const;
  /// -alpha_{i*} e_{i*} at the active index.
  Vec gradient_at(const Vec& x) const;
};

/// Solves per class the positive root t = e^{alpha_i} of
/// lambda_i t^2 - (lambda_i + mu_i + c) t + mu_i = 0 with t > 1, polished by
/// Newton so the defining relation holds to near machine precision.
ClosedFormValue competing_queues_value(const NetworkModel& model,
                                       const Domain& domain);

/// Independent root: bisection on (lambda e^a + mu e^{-a})/(lambda + mu)
/// = 1 + c/(lambda + mu) over [1e-8, 50].
double competing_alpha_bisect(double lambda, double mu, double c);

struct ScanSample {
  Vec nu;
  double h = 0.0;
};

struct ScanResult {
  double min_h = 0.0;
  Vec argmin_nu;
  std::vector<ScanSample> samples;
};

/// Evaluates the exchange value at q = -sum_i nu_i alpha_i e_i over the
/// simplex slice {nu >= 0, sum nu <= 1}: the origin and the unit vectors
/// first, then uniform random fill. A nonnegative minimum certifies the
/// closed form as a subsolution.
ScanResult subsolution_scan(const ClosedFormValue& value, const NetworkModel& model,
                            std::size_t samples, std::uint64_t seed);

}  // namespace rsnet
