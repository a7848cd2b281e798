#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "rsnet/game.hpp"
#include "rsnet/rng.hpp"
#include "test_models.hpp"

using namespace rsnet;
using namespace rsnet::testing;

namespace {

double divergence_oracle(double x) {
  if (x == 0.0) return 1.0;
  return x * std::log(x) - x + 1.0;
}

// Raw exchange objective with the allocation replying optimally, written out
// independently of the library path.
double rate_committed_value(const NetworkModel& m, const Vec& q, const Vec& lam_bar,
                            const Vec& mu_bar) {
  double total = m.c;
  for (std::size_t j = 0; j < m.num_classes; ++j) {
    if (m.lambda[j] > 0.0)
      total += lam_bar[j] * q[j] + m.lambda[j] * divergence_oracle(lam_bar[j] / m.lambda[j]);
  }
  for (std::size_t k = 0; k < m.num_servers; ++k) {
    double best = 0.0;
    for (std::size_t i : m.serves[k]) {
      const double qr = m.route[i] == kExit ? 0.0 : q[static_cast<std::size_t>(m.route[i])];
      const double s = mu_bar[i] * (qr - q[i]) + m.mu[i] * divergence_oracle(mu_bar[i] / m.mu[i]);
      best = std::max(best, s);
    }
    total += best;
  }
  return total;
}

// Exhaustive minimum over the full product grid (every arrival axis of a
// class with arrivals times every service axis).
double brute_force_inf_sup(const NetworkModel& m, const Vec& q, const RateGridSpec& grid) {
  const std::size_t J = m.num_classes;
  std::vector<std::size_t> axes;  // arrival axes first (index j), then J+i
  for (std::size_t j = 0; j < J; ++j)
    if (m.lambda[j] > 0.0) axes.push_back(j);
  for (std::size_t i = 0; i < J; ++i) axes.push_back(J + i);

  const std::size_t P = grid.points_per_axis;
  const double spacing = grid.bound / static_cast<double>(P - 1);
  std::vector<std::size_t> idx(axes.size(), 0);
  Vec lam_bar(J, 0.0), mu_bar(J, 0.0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const double g = spacing * static_cast<double>(idx[a]);
      if (axes[a] < J) {
        lam_bar[axes[a]] = g;
      } else {
        mu_bar[axes[a] - J] = g;
      }
    }
    best = std::min(best, rate_committed_value(m, q, lam_bar, mu_bar));
    bool advanced = false;
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++idx[a] < P) {
        advanced = true;
        break;
      }
      idx[a] = 0;
    }
    if (!advanced) return best;
  }
}

Vec random_q(CounterRng& rng, std::size_t j_count, double box) {
  Vec q(j_count);
  for (double& v : q) v = box * (2.0 * rng.uniform01() - 1.0);
  return q;
}

}  // namespace

TEST_CASE("rate divergence is the entropy price of bending a Poisson stream") {
  CHECK(rate_divergence(1.0) == 0.0);
  CHECK(rate_divergence(0.0) == 1.0);
  CHECK(rate_divergence(2.0) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-15));
  CHECK(rate_divergence(0.5) > 0.0);
  CHECK(std::isinf(rate_divergence(-0.1)));
}

TEST_CASE("running cost of doubling the arrival rate") {
  const NetworkModel m = tiny_chain();
  ControlVector idle;
  idle.u = {0.0};
  RatePerturbation rates;
  rates.lam_bar = {2.0};
  rates.mu_bar = {1.0};
  CHECK(running_cost(m, idle, rates) ==
        doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-15));

  // Conjuring arrivals for a class that has none costs infinity.
  const NetworkModel t = tandem();
  ControlVector u2;
  u2.u = {0.0, 0.0};
  RatePerturbation bad;
  bad.lam_bar = {1.0, 0.5};
  bad.mu_bar = {2.0, 2.0};
  CHECK(std::isinf(running_cost(t, u2, bad)));
}

TEST_CASE("drift moves served customers along the route") {
  const NetworkModel m = tandem();
  ControlVector u;
  u.u = {1.0, 0.0};
  RatePerturbation rates;
  rates.lam_bar = {0.7, 0.0};
  rates.mu_bar = {3.0, 1.0};
  const Vec v = drift(m, u, rates);
  CHECK(v[0] == doctest::Approx(0.7 - 3.0).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("inner minimizing rates tilt exponentially along the gradient") {
  const NetworkModel m = reentrant3();
  const Vec q{0.5, -0.3, 0.2};
  const RatePerturbation r = inner_min_rates(m, q);
  CHECK(r.lam_bar[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(r.lam_bar[1] == 0.0);
  CHECK(r.lam_bar[2] == 0.0);
  CHECK(r.mu_bar[0] == doctest::Approx(3.0 * std::exp(0.5 - (-0.3))).epsilon(1e-14));
  CHECK(r.mu_bar[1] == doctest::Approx(4.0 * std::exp(-0.3 - 0.2)).epsilon(1e-14));
  CHECK(r.mu_bar[2] == doctest::Approx(2.0 * std::exp(0.2)).epsilon(1e-14));

  const RatePerturbation capped = inner_min_rates(m, q, 2.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(capped.mu_bar[i] <= 2.0);
    CHECK(capped.mu_bar[i] == doctest::Approx(std::min(r.mu_bar[i], 2.0)).epsilon(1e-14));
  }
}

TEST_CASE("Hamiltonian at q = 0 equals the risk parameter") {
  CHECK(hamiltonian(tandem(), {0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hamiltonian(competing({1.0, 1.0}, {2.0, 2.0}, 3.5), {0.0, 0.0}) ==
        doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("plugging the minimizing rates and maximizing allocation back") {
  const std::vector<NetworkModel> models{competing({1.0, 1.0}, {2.0, 2.0}, 1.0), tandem(),
                                         reentrant3()};
  for (const NetworkModel& m : models) {
    CounterRng rng(23, m.num_classes);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec q = random_q(rng, m.num_classes, 2.0);
      const double h = hamiltonian(m, q);
      const RatePerturbation rates = inner_min_rates(m, q);
      const ControlVector u = gradient_feedback(m, q);
      double plug = m.c + running_cost(m, u, rates);
      const Vec b = drift(m, u, rates);
      for (std::size_t i = 0; i < m.num_classes; ++i) plug += q[i] * b[i];
      CHECK(std::fabs(plug - h) <= 1e-12);
    }
  }
}

TEST_CASE("gradient feedback serves the class with the best positive advantage") {
  SUBCASE("zero gradient idles everywhere") {
    const ControlVector u = gradient_feedback(tandem(), {0.0, 0.0});
    CHECK(u.u == Vec{0.0, 0.0});
  }
  SUBCASE("competing queues serve the most negative-gradient class by rate") {
    const NetworkModel m = competing({1.0, 1.0}, {2.0, 3.0}, 1.0);
    CHECK(gradient_feedback(m, {-1.0, -1.0}).u == Vec{0.0, 1.0});
    CHECK(gradient_feedback(m, {0.5, -0.1}).u == Vec{0.0, 1.0});
    CHECK(gradient_feedback(m, {0.5, 0.1}).u == Vec{0.0, 0.0});
  }
  SUBCASE("exact ties pick the lowest class index") {
    const NetworkModel m = competing({1.0, 1.0}, {2.0, 2.0}, 1.0);
    CHECK(gradient_feedback(m, {-1.0, -1.0}).u == Vec{1.0, 0.0});
  }
  SUBCASE("tandem serves upstream when its gradient is below downstream") {
    CHECK(gradient_feedback(tandem(), {-1.0, 0.0}).u == Vec{1.0, 0.0});
  }
}

TEST_CASE("per-axis grid minimum equals the exhaustive product-grid minimum") {
  const std::vector<NetworkModel> models{competing({1.0, 1.0}, {2.0, 2.0}, 1.0),
                                         reentrant3()};
  for (const NetworkModel& m : models) {
    const RateGridSpec grid{rate_bound_heuristic(m, 2.0), 5};
    CounterRng rng(29, m.num_classes);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec q = random_q(rng, m.num_classes, 2.0);
      const IsaacsGapResult res = isaacs_gap(m, q, grid);
      const double brute = brute_force_inf_sup(m, q, grid);
      CHECK(res.inf_sup == doctest::Approx(brute).epsilon(1e-12));
    }
  }
}

TEST_CASE("the play-order gap is nonnegative, certified, and refinement-monotone") {
  const NetworkModel m = competing({1.0, 1.0}, {2.0, 2.0}, 1.0);
  const RateGridSpec coarse{rate_bound_heuristic(m, 2.0), 33};
  const RateGridSpec fine = refine(coarse);
  CHECK(fine.points_per_axis == 65);
  CHECK(fine.bound == coarse.bound);

  CounterRng rng(31, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec q = random_q(rng, m.num_classes, 2.0);
    const IsaacsGapResult c = isaacs_gap(m, q, coarse);
    const IsaacsGapResult f = isaacs_gap(m, q, fine);
    CHECK(c.gap >= -1e-12);
    CHECK(c.gap <= c.declared_tol);
    CHECK(f.gap <= f.declared_tol);
    // The refined grid contains the coarse one, so the minimum cannot rise.
    CHECK(f.inf_sup <= c.inf_sup + 1e-15);
    CHECK(f.declared_tol <= c.declared_tol + 1e-12);
  }
}

TEST_CASE("closed-form decay rates for frozen parameter triples") {
  struct Triple {
    double lambda, mu, c, alpha;
  };
  const Triple triples[] = {
      {1.0, 2.0, 3.0, std::log(3.0 + std::sqrt(7.0))},
      {1.0, 1.0, 2.0, std::log(2.0 + std::sqrt(3.0))},
      {2.0, 3.0, 10.0, std::log((15.0 + std::sqrt(201.0)) / 4.0)},
  };
  for (const Triple& t : triples) {
    const NetworkModel m = competing({t.lambda}, {t.mu}, t.c);
    const Domain d = rect_domain({1.0});
    const ClosedFormValue v = competing_queues_value(m, d);
    CHECK(v.alpha[0] == doctest::Approx(t.alpha).epsilon(1e-12));

    // Defining relation, normalized as in the scaled generator identity.
    const double f = (t.lambda * std::exp(v.alpha[0]) + t.mu * std::exp(-v.alpha[0])) /
                     (t.lambda + t.mu);
    CHECK(std::fabs(f - (1.0 + t.c / (t.lambda + t.mu))) <= 1e-12);

    // The gradient of the value at the active face is a Hamiltonian zero.
    CHECK(std::fabs(hamiltonian(m, {-v.alpha[0]})) <= 1e-10);

    // Independent bisection root agrees.
    CHECK(std::fabs(competing_alpha_bisect(t.lambda, t.mu, t.c) - v.alpha[0]) <= 1e-10);
  }
}

TEST_CASE("closed-form value surface and its feedback gradient") {
  const NetworkModel m = competing({1.0, 1.0}, {2.0, 2.0}, 5.0);
  const Domain d = rect_domain({1.0, 2.0});
  const ClosedFormValue v = competing_queues_value(m, d);
  const double a = v.alpha[0];
  CHECK(v.alpha[1] == doctest::Approx(a).epsilon(1e-15));  // symmetric classes

  CHECK(v.evaluate({0.0, 0.0}) == doctest::Approx(a * 1.0).epsilon(1e-14));
  CHECK(v.evaluate({0.5, 0.0}) == doctest::Approx(a * 0.5).epsilon(1e-14));
  CHECK(v.active_index({0.5, 0.0}) == 0);
  CHECK(v.active_index({0.0, 1.8}) == 1);
  CHECK(v.active_index({0.0, 1.0}) == 0);  // tie goes to the lowest index

  const Vec g = v.gradient_at({0.5, 0.0});
  CHECK(g[0] == doctest::Approx(-a).epsilon(1e-14));
  CHECK(g[1] == 0.0);
}

TEST_CASE("closed form rejects models outside its shape") {
  CHECK_THROWS_AS(competing_queues_value(tandem(), rect_domain({1.0, 1.0})),
                  std::invalid_argument);
  const NetworkModel m = competing({1.0, 1.0}, {2.0, 2.0}, 1.0);
  CHECK_THROWS_AS(competing_queues_value(m, cap_domain({1.0, 1.0}, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("trajectory cost for a straight escape") {
  const NetworkModel m = tiny_chain();
  const Domain d = rect_domain({1.0});
  auto idle = [](double) {
    ControlVector u;
    u.u = {0.0};
    return u;
  };
  auto doubled = [](double) {
    RatePerturbation r;
    r.lam_bar = {2.0};
    r.mu_bar = {1.0};
    return r;
  };
  const GameCost out = trajectory_cost(m, d, {0.0}, idle, doubled, 1.0 / 64, 4.0);
  REQUIRE(out.sigma.has_value());
  CHECK(*out.sigma == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(out.cost == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(out.exited_through == BoundaryClass::Open);
}

TEST_CASE("trajectory cost reports a horizon runout") {
  const NetworkModel m = tiny_chain();
  const Domain d = rect_domain({1.0});
  auto idle = [](double) {
    ControlVector u;
    u.u = {0.0};
    return u;
  };
  auto frozen = [](double) {
    RatePerturbation r;
    r.lam_bar = {0.0};
    r.mu_bar = {1.0};
    return r;
  };
  const GameCost out = trajectory_cost(m, d, {0.5}, idle, frozen, 1.0 / 64, 1.0);
  CHECK(!out.sigma.has_value());
  // Suppressing the whole arrival stream costs lambda per unit time.
  CHECK(out.cost == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(trajectory_cost(m, d, {1.5}, idle, frozen, 1.0 / 64, 1.0),
                  std::invalid_argument);
}

TEST_CASE("subsolution scan covers the simplex and certifies the symmetric model") {
  const NetworkModel m = competing({1.0, 1.0}, {1.0, 1.0}, 5.0);
  const Domain d = rect_domain({1.0, 1.0});
  const ClosedFormValue v = competing_queues_value(m, d);
  const ScanResult scan = subsolution_scan(v, m, 1000, 42);

  REQUIRE(scan.samples.size() == 1000);
  CHECK(scan.samples[0].nu == Vec{0.0, 0.0});
  CHECK(scan.samples[1].nu == Vec{1.0, 0.0});
  CHECK(scan.samples[2].nu == Vec{0.0, 1.0});
  CHECK(scan.samples[0].h == doctest::Approx(5.0).epsilon(1e-14));

  for (const ScanSample& s : scan.samples) {
    double total = 0.0;
    for (double nu : s.nu) {
      CHECK(nu >= 0.0);
      total += nu;
    }
    CHECK(total <= 1.0 + 1e-12);
  }
  // The minimum sits at the unit vectors, where H vanishes by construction.
  CHECK(scan.min_h >= -1e-8);
  CHECK(scan.min_h <= 1e-10);
}

TEST_CASE("decay rates grow with the risk parameter") {
  double prev = 0.0;
  for (const double c : {1.0, 10.0, 100.0}) {
    const NetworkModel m = competing({1.0}, {1.0}, c);
    const ClosedFormValue v = competing_queues_value(m, rect_domain({1.0}));
    CHECK(v.alpha[0] > prev);
    prev = v.alpha[0];
  }
}
