#include "rsnet/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "rsnet/config.hpp"
#include "rsnet/csv.hpp"
#include "rsnet/dpe.hpp"
#include "rsnet/game.hpp"
#include "rsnet/mc.hpp"
#include "rsnet/network.hpp"
#include "rsnet/rng.hpp"
#include "rsnet/skorokhod.hpp"

namespace rsnet {
namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CsvWriter open_csv(const ExperimentSpec& spec, const std::string& name) {
  const std::filesystem::path path = std::filesystem::path(spec.out_dir) / name;
  CsvWriter csv(path.string());
  if (spec.stamp) csv.comment(utc_timestamp());
  return csv;
}

std::vector<std::string> numbered(const std::string& base, std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(base + std::to_string(i + 1));
  return out;
}

template <typename T>
void append(std::vector<std::string>& row, const T& value) {
  if constexpr (std::is_same_v<T, std::string>) {
    row.push_back(value);
  } else if constexpr (std::is_floating_point_v<T>) {
    row.push_back(format_double(value));
  } else {
    row.push_back(std::to_string(value));
  }
}

// ---------------------------------------------------------------- validate

int cmd_validate(const ModelConfig& cfg, std::ostream& log) {
  const std::vector<std::string> problems = [&] {
    std::vector<std::string> all = validate_model(cfg.model);
    const std::vector<std::string> dom = validate_domain(cfg.model, cfg.domain);
    all.insert(all.end(), dom.begin(), dom.end());
    return all;
  }();
  if (!problems.empty()) {
    for (const std::string& p : problems) log << "violation: " << p << "\n";
    return kExitConfigError;
  }
  log << "model ok: J=" << cfg.model.num_classes << " K=" << cfg.model.num_servers
      << " c=" << cfg.model.c << " domain=" << (cfg.domain.kind == Domain::Kind::Rect ? "rect" : "cap")
      << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sp-check

Path random_path(const NetworkModel& model, CounterRng& rng, std::size_t steps, double horizon) {
  const std::size_t j_count = model.num_classes;
  Path psi;
  psi.times.resize(steps + 1);
  psi.values.assign(steps + 1, Vec(j_count, 0.0));
  for (std::size_t i = 0; i < j_count; ++i) psi.values[0][i] = rng.uniform01();
  const double dt = horizon / static_cast<double>(steps);
  for (std::size_t s = 0; s <= steps; ++s) psi.times[s] = dt * static_cast<double>(s);
  for (std::size_t s = 1; s <= steps; ++s) {
    for (std::size_t i = 0; i < j_count; ++i) {
      const double inc = 0.5 * (rng.uniform01() - 0.5);
      psi.values[s][i] = psi.values[s - 1][i] + inc;
    }
  }
  return psi;
}

double path_sup_distance(const Path& a, const Path& b) {
  double worst = 0.0;
  for (std::size_t s = 0; s < a.values.size(); ++s)
    for (std::size_t i = 0; i < a.values[s].size(); ++i)
      worst = std::max(worst, std::abs(a.values[s][i] - b.values[s][i]));
  return worst;
}

int cmd_sp_check(const ModelConfig& cfg, const ExperimentSpec& spec, std::ostream& log) {
  const NetworkModel& model = cfg.model;
  const std::size_t paths = std::max<std::size_t>(spec.samples, 2);
  constexpr std::size_t kSteps = 256;
  constexpr double kHorizon = 4.0;
  constexpr double kTol = 1e-9;

  CsvWriter csv = open_csv(spec, "sp_check.csv");
  csv.row({"path_id", "reconstruction", "nonnegativity", "monotonicity", "complementarity",
           "passed"});

  bool all_passed = true;
  std::vector<Path> reflected;
  reflected.reserve(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    CounterRng rng(spec.seed, p);
    const Path psi = random_path(model, rng, kSteps, kHorizon);
    const ReflectionOutput out = skorokhod_map(model, psi);
    const SpCheckReport report = verify_sp_solution(model, psi, out.phi, out.eta, kTol);
    std::vector<std::string> row;
    append(row, p);
    bool ok = true;
    for (const SpCheck& check : report.checks) {
      append(row, check.worst);
      ok = ok && check.passed;
    }
    append(row, std::string(ok ? "1" : "0"));
    csv.row(row);
    all_passed = all_passed && ok;
    reflected.push_back(out.phi);
    if (p == 0) {
      CsvWriter dump = open_csv(spec, "sp_path0.csv");
      std::vector<std::string> header{"t"};
      for (const std::string& h : numbered("psi", model.num_classes)) header.push_back(h);
      for (const std::string& h : numbered("phi", model.num_classes)) header.push_back(h);
      for (const std::string& h : numbered("eta", model.num_classes)) header.push_back(h);
      dump.row(header);
      for (std::size_t s = 0; s < psi.times.size(); ++s) {
        std::vector<std::string> r;
        append(r, psi.times[s]);
        for (double v : psi.values[s]) append(r, v);
        for (double v : out.phi.values[s]) append(r, v);
        for (double v : out.eta.values[s]) append(r, v);
        dump.row(r);
      }
    }
  }

  // Lipschitz diagnostic: the map is a sup-norm contraction up to a constant
  // that depends only on the routing; report the worst observed ratio.
  double worst_ratio = 0.0;
  for (std::size_t p = 0; p + 1 < paths; p += 2) {
    CounterRng rng_a(spec.seed, p);
    CounterRng rng_b(spec.seed, p + 1);
    const Path psi_a = random_path(model, rng_a, kSteps, kHorizon);
    const Path psi_b = random_path(model, rng_b, kSteps, kHorizon);
    const double d_in = path_sup_distance(psi_a, psi_b);
    const double d_out = path_sup_distance(reflected[p], reflected[p + 1]);
    if (d_in > 0) worst_ratio = std::max(worst_ratio, d_out / d_in);
  }
  log << "sp-check: " << paths << " paths, worst Lipschitz ratio " << worst_ratio << "\n";

  // Consistency of the constrained ODE velocity with the discrete map: for
  // random states and velocities, one small reflected step must match the
  // projected velocity field to first order.
  std::size_t pi_failures = 0;
  const std::vector<std::size_t> order = topological_order(model);
  constexpr double kDelta = 1e-4;
  for (std::size_t trial = 0; trial < spec.samples; ++trial) {
    CounterRng rng(spec.seed, 1000000 + trial);
    Vec x(model.num_classes), v(model.num_classes);
    for (std::size_t i = 0; i < model.num_classes; ++i) {
      // Positive coordinates stay clear of zero so the active set is stable
      // across the finite-difference step.
      x[i] = (rng.uniform01() < 0.5) ? 0.0 : 0.1 + 0.9 * rng.uniform01();
      v[i] = 2.0 * rng.uniform01() - 1.0;
    }
    const Vec pi = projected_velocity(model, x, v);
    Vec step = x;
    constexpr int kSub = 16;
    for (int s = 0; s < kSub; ++s) {
      Vec delta(model.num_classes);
      for (std::size_t i = 0; i < model.num_classes; ++i) delta[i] = v[i] * (kDelta / kSub);
      step = reflect_step(model, order, step, delta);
    }
    double err = 0.0;
    for (std::size_t i = 0; i < model.num_classes; ++i)
      err = std::max(err, std::abs((step[i] - x[i]) / kDelta - pi[i]));
    if (err > 1e-3) ++pi_failures;
  }
  log << "sp-check: projected-velocity consistency failures " << pi_failures << "/"
      << spec.samples << "\n";

  if (!all_passed || pi_failures > 0) {
    log << "sp-check: FAIL\n";
    return kExitNumericalFailure;
  }
  log << "sp-check: ok\n";
  return kExitOk;
}

// ---------------------------------------------------------------- ham-check

int cmd_ham_check(const ModelConfig& cfg, const ExperimentSpec& spec, std::ostream& log) {
  const NetworkModel& model = cfg.model;
  const std::size_t j_count = model.num_classes;
  constexpr double kBox = 2.0;

  CsvWriter csv = open_csv(spec, "ham_check.csv");
  {
    std::vector<std::string> header = numbered("q", j_count);
    header.insert(header.end(), {"H", "inf_sup", "sup_inf", "gap", "declared_tol", "plugback_err"});
    csv.row(header);
  }

  const double bound = rate_bound_heuristic(model, kBox);
  const RateGridSpec grid{bound, 65};
  CounterRng rng(spec.seed, 0);
  bool ok = true;
  double worst_plugback = 0.0;
  double worst_excess = -1e300;  // gap minus declared tolerance
  for (std::size_t t = 0; t < spec.samples; ++t) {
    Vec q(j_count);
    for (std::size_t i = 0; i < j_count; ++i) q[i] = kBox * (2.0 * rng.uniform01() - 1.0);

    const double h = hamiltonian(model, q);
    const RatePerturbation rates = inner_min_rates(model, q);
    const ControlVector u = gradient_feedback(model, q);
    double plug = model.c + running_cost(model, u, rates);
    const Vec b = drift(model, u, rates);
    for (std::size_t i = 0; i < j_count; ++i) plug += q[i] * b[i];
    const double plugback_err = std::abs(plug - h);
    worst_plugback = std::max(worst_plugback, plugback_err);

    const IsaacsGapResult gap = isaacs_gap(model, q, grid);
    worst_excess = std::max(worst_excess, gap.gap - gap.declared_tol);
    if (plugback_err > 1e-12 || gap.gap > gap.declared_tol || gap.gap < -1e-12) ok = false;

    std::vector<std::string> row;
    for (double qi : q) append(row, qi);
    append(row, h);
    append(row, gap.inf_sup);
    append(row, gap.sup_inf);
    append(row, gap.gap);
    append(row, gap.declared_tol);
    append(row, plugback_err);
    csv.row(row);
  }
  log << "ham-check: " << spec.samples << " gradients, worst plug-back error " << worst_plugback
      << ", worst gap excess over declared tolerance " << worst_excess << "\n";
  if (!ok) {
    log << "ham-check: FAIL\n";
    return kExitNumericalFailure;
  }
  log << "ham-check: ok\n";
  return kExitOk;
}

// -------------------------------------------------------------- closed-form

int cmd_closed_form(const ModelConfig& cfg, const ExperimentSpec& spec, std::ostream& log) {
  ClosedFormValue value;
  try {
    value = competing_queues_value(cfg.model, cfg.domain);
  } catch (const std::invalid_argument& e) {
    log << "closed-form: " << e.what() << "\n";
    return kExitConfigError;
  }
  const NetworkModel& model = cfg.model;

  CsvWriter alpha_csv = open_csv(spec, "alpha.csv");
  alpha_csv.row({"class", "lambda", "mu", "c", "alpha", "identity_residual", "bisect_diff"});
  double worst_residual = 0.0;
  for (std::size_t i = 0; i < model.num_classes; ++i) {
    const double lam = model.lambda[i];
    const double mu = model.mu[i];
    const double a = value.alpha[i];
    // the decay rate solves  lambda e^a + mu e^-a = lambda + mu + c
    const double residual = lam * std::exp(a) + mu * std::exp(-a) - (lam + mu + model.c);
    worst_residual = std::max(worst_residual, std::abs(residual));
    const double bisect = competing_alpha_bisect(lam, mu, model.c);
    std::vector<std::string> row;
    append(row, i + 1);
    append(row, lam);
    append(row, mu);
    append(row, model.c);
    append(row, a);
    append(row, residual);
    append(row, std::abs(a - bisect));
    alpha_csv.row(row);
  }

  const std::size_t scan_samples = std::max<std::size_t>(spec.samples, model.num_classes + 1);
  const ScanResult scan = subsolution_scan(value, model, scan_samples, spec.seed);
  CsvWriter scan_csv = open_csv(spec, "scan.csv");
  {
    std::vector<std::string> header = numbered("nu", model.num_classes);
    header.push_back("H");
    scan_csv.row(header);
  }
  for (const ScanSample& s : scan.samples) {
    std::vector<std::string> row;
    for (double nu : s.nu) append(row, nu);
    append(row, s.h);
    scan_csv.row(row);
  }

  log << "closed-form: worst alpha identity residual " << worst_residual << "\n";
  log << "closed-form: scan of " << scan_samples << " directions, min H " << scan.min_h << "\n";
  const bool certified = scan.min_h >= -1e-8;
  log << "closed-form: subsolution certificate " << (certified ? "HOLDS" : "VIOLATED") << "\n";
  if (worst_residual > 1e-10 || !certified) {
    log << "closed-form: FAIL\n";
    return kExitNumericalFailure;
  }
  log << "closed-form: ok\n";
  return kExitOk;
}

// ---------------------------------------------------------------- solve-dpe

std::vector<int> n_values_or(const ExperimentSpec& spec, std::vector<int> fallback) {
  return spec.n_values.empty() ? std::move(fallback) : spec.n_values;
}

int cmd_solve_dpe(const ModelConfig& cfg, const ExperimentSpec& spec, std::ostream& log) {
  bool all_converged = true;
  for (const int n : n_values_or(spec, {8})) {
    const auto lattice = build_lattice(cfg.model, cfg.domain, n);
    SolveOptions options;
    options.tol = spec.tol;
    options.workers = spec.workers;
    const SolveResult result = solve_W(cfg.model, cfg.domain, lattice, options);
    const LatticeField v = extract_V(result.w);
    const PolicyField policy = extract_policy(cfg.model, cfg.domain, result.w);

    CsvWriter csv = open_csv(spec, "dpe_n" + std::to_string(n) + ".csv");
    {
      std::vector<std::string> header = numbered("x", cfg.model.num_classes);
      header.insert(header.end(), {"W", "V", "policy"});
      csv.row(header);
    }
    for (std::size_t s = 0; s < lattice->size(); ++s) {
      std::vector<std::string> row;
      for (const int k : lattice->states[s]) append(row, static_cast<double>(k) / n);
      append(row, result.w.values[s]);
      append(row, v.values[s]);
      append(row, policy.vertex[s]);
      csv.row(row);
    }
    log << "solve-dpe: n=" << n << " states=" << lattice->size() << " iterations="
        << result.iterations << " final_change=" << result.final_change
        << (result.converged ? "" : " NOT CONVERGED") << "\n";
    all_converged = all_converged && result.converged;
  }
  if (!all_converged) {
    log << "solve-dpe: FAIL (value iteration did not converge; partial artifacts kept)\n";
    return kExitNumericalFailure;
  }
  log << "solve-dpe: ok\n";
  return kExitOk;
}

// ----------------------------------------------------------------- simulate

int cmd_simulate(const ModelConfig& cfg, const ExperimentSpec& spec, std::ostream& log) {
  const NetworkModel& model = cfg.model;
  bool ok = true;
  for (const int n : n_values_or(spec, {8})) {
    const auto lattice = build_lattice(model, cfg.domain, n);
    SolveOptions options;
    options.tol = spec.tol;
    options.workers = spec.workers;
    const SolveResult result = solve_W(model, cfg.domain, lattice, options);
    if (!result.converged) {
      log << "simulate: n=" << n << " value iteration did not converge\n";
      ok = false;
      continue;
    }
    const LatticeField v = extract_V(result.w);
    const PolicyField policy = extract_policy(model, cfg.domain, result.w);

    const LatticeState origin(model.num_classes, 0);
    const auto origin_index = lattice->find(origin);
    const double v_origin = origin_index ? v.values[*origin_index] : 0.0;

    SimConfig sim;
    sim.n = n;
    sim.trials = spec.trials;
    sim.seed = spec.seed;
    sim.horizon_cap = horizon_cap_heuristic(v_origin, model.c);
    sim.workers = spec.workers;

    const std::vector<std::pair<std::string, PolicyRule>> policies{
        {"optimal", policy_from_field(model, policy)},
        {"mu-priority", mu_weight_priority_policy(model)},
        {"never-serve", never_serve_policy(model)},
    };
    const auto estimates = compare_policies(model, cfg.domain, sim, policies, origin);

    CsvWriter csv = open_csv(spec, "simulate_n" + std::to_string(n) + ".csv");
    csv.row({"name", "trials", "mean", "stderr", "V_hat", "censored_count"});
    for (const auto& [name, est] : estimates) {
      std::vector<std::string> row;
      append(row, name);
      append(row, est.trials);
      append(row, est.mean);
      append(row, est.std_error);
      append(row, est.v_hat);
      append(row, est.censored);
      csv.row(row);
      log << "simulate: n=" << n << " policy=" << name << " V_hat=" << est.v_hat << " censored="
          << est.censored << "\n";
      if (est.censored > 0)
        log << "simulate:   censoring inflates the mean by at most " << est.censored_bias_bound
            << ", so V_hat leans low\n";
    }
    log << "simulate: n=" << n << " lattice V(0)=" << v_origin << " horizon cap "
        << sim.horizon_cap << "\n";
  }
  if (!ok) {
    log << "simulate: FAIL\n";
    return kExitNumericalFailure;
  }
  log << "simulate: ok\n";
  return kExitOk;
}

// ----------------------------------------------------------------- converge

int cmd_converge(const ModelConfig& cfg, const ExperimentSpec& spec, std::ostream& log) {
  ClosedFormValue value;
  try {
    value = competing_queues_value(cfg.model, cfg.domain);
  } catch (const std::invalid_argument& e) {
    log << "converge: " << e.what() << "\n";
    return kExitConfigError;
  }
  std::vector<int> levels = n_values_or(spec, {8, 16, 32});
  std::sort(levels.begin(), levels.end());

  struct Level {
    int n;
    std::shared_ptr<const Lattice> lattice;
    LatticeField v;
  };
  std::vector<Level> solved;
  for (const int n : levels) {
    auto lattice = build_lattice(cfg.model, cfg.domain, n);
    SolveOptions options;
    options.tol = spec.tol;
    options.workers = spec.workers;
    const SolveResult result = solve_W(cfg.model, cfg.domain, lattice, options);
    if (!result.converged) {
      log << "converge: n=" << n << " value iteration did not converge\n";
      return kExitNumericalFailure;
    }
    LatticeField v = extract_V(result.w);
    solved.push_back({n, std::move(lattice), std::move(v)});
    log << "converge: n=" << n << " solved in " << result.iterations << " iterations\n";
  }

  // Error is measured on interior points of the coarsest lattice that exist
  // on every finer lattice, so all levels are compared at identical states.
  const Level& coarse = solved.front();
  CsvWriter csv = open_csv(spec, "converge.csv");
  csv.row({"n", "shared_states", "sup_error"});
  std::vector<double> errors;
  std::size_t shared_count = 0;
  {
    for (std::size_t s = 0; s < coarse.lattice->size(); ++s) {
      const LatticeState& k0 = coarse.lattice->states[s];
      Vec x(k0.size());
      for (std::size_t i = 0; i < k0.size(); ++i) x[i] = static_cast<double>(k0[i]) / coarse.n;
      if (classify_point(cfg.model, cfg.domain, x) != BoundaryClass::Interior) continue;
      bool everywhere = true;
      std::vector<std::size_t> indices(solved.size());
      for (std::size_t l = 0; l < solved.size(); ++l) {
        LatticeState scaled(k0.size());
        bool exact = true;
        for (std::size_t i = 0; i < k0.size(); ++i) {
          const long long num = static_cast<long long>(k0[i]) * solved[l].n;
          if (num % coarse.n != 0) {
            exact = false;
            break;
          }
          scaled[i] = static_cast<int>(num / coarse.n);
        }
        std::optional<std::size_t> idx;
        if (exact) idx = solved[l].lattice->find(scaled);
        if (!idx) {
          everywhere = false;
          break;
        }
        indices[l] = *idx;
      }
      if (!everywhere) continue;
      ++shared_count;
      const double exact_v = value.evaluate(x);
      if (errors.size() < solved.size()) errors.resize(solved.size(), 0.0);
      for (std::size_t l = 0; l < solved.size(); ++l) {
        const double err = std::abs(solved[l].v.values[indices[l]] - exact_v);
        errors[l] = std::max(errors[l], err);
      }
    }
  }
  if (shared_count == 0) {
    log << "converge: no interior lattice point is shared across the requested levels\n";
    return kExitConfigError;
  }
  for (std::size_t l = 0; l < solved.size(); ++l) {
    std::vector<std::string> row;
    append(row, solved[l].n);
    append(row, shared_count);
    append(row, errors[l]);
    csv.row(row);
    log << "converge: n=" << solved[l].n << " sup error " << errors[l] << " over " << shared_count
        << " shared interior states\n";
  }
  bool decreasing = true;
  for (std::size_t l = 0; l + 1 < errors.size(); ++l)
    if (!(errors[l + 1] < errors[l])) decreasing = false;
  log << "converge: sup error " << (decreasing ? "strictly decreases" : "DOES NOT decrease")
      << " along the refinement\n";
  if (!decreasing) {
    log << "converge: FAIL\n";
    return kExitNumericalFailure;
  }
  log << "converge: ok\n";
  return kExitOk;
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, std::ostream& log) {
  ModelConfig cfg;
  try {
    cfg = load_config(spec.config_path);
    if (spec.c_override) cfg.model.c = *spec.c_override;
    if (spec.subcommand != "validate") {
      std::vector<std::string> problems = validate_model(cfg.model);
      const std::vector<std::string> dom = validate_domain(cfg.model, cfg.domain);
      problems.insert(problems.end(), dom.begin(), dom.end());
      if (!problems.empty()) {
        for (const std::string& p : problems) log << "config error: " << p << "\n";
        return kExitConfigError;
      }
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) {
    log << "config error: cannot create output directory '" << spec.out_dir
        << "': " << ec.message() << "\n";
    return kExitConfigError;
  }

  try {
    if (spec.subcommand == "validate") return cmd_validate(cfg, log);
    if (spec.subcommand == "sp-check") return cmd_sp_check(cfg, spec, log);
    if (spec.subcommand == "ham-check") return cmd_ham_check(cfg, spec, log);
    if (spec.subcommand == "closed-form") return cmd_closed_form(cfg, spec, log);
    if (spec.subcommand == "solve-dpe") return cmd_solve_dpe(cfg, spec, log);
    if (spec.subcommand == "simulate") return cmd_simulate(cfg, spec, log);
    if (spec.subcommand == "converge") return cmd_converge(cfg, spec, log);
  } catch (const std::exception& e) {
    log << "failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  log << "config error: unknown subcommand '" << spec.subcommand << "'\n";
  return kExitConfigError;
}

}  // namespace rsnet
