#include "rsnet/dpe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "rsnet/parallel.hpp"

namespace rsnet {

std::size_t LatticeStateHash::operator()(const LatticeState& k) const {
  std::size_t h = 1469598103934665603ull;
  for (int v : k) {
    h ^= static_cast<std::size_t>(static_cast<unsigned int>(v));
    h *= 1099511628211ull;
  }
  return h;
}

std::optional<std::size_t> Lattice::find(const LatticeState& k) const {
  auto it = index.find(k);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::shared_ptr<const Lattice> build_lattice(const NetworkModel& m, const Domain& d,
                                             int n) {
  auto lat = std::make_shared<Lattice>();
  lat->n = n;
  lat->states = enumerate_lattice(m, d, n);
  lat->index.reserve(lat->states.size());
  for (std::size_t s = 0; s < lat->states.size(); ++s)
    lat->index.emplace(lat->states[s], s);
  return lat;
}

DpeSystem::DpeSystem(const NetworkModel& model, std::shared_ptr<const Lattice> lattice)
    : model_(model), lattice_(std::move(lattice)) {
  vertices_ = control_vertices(model_);
  lambda_sum_ = 0.0;
  double mu_sum = 0.0;
  for (std::size_t j = 0; j < model_.num_classes; ++j) {
    lambda_sum_ += model_.lambda[j];
    mu_sum += model_.mu[j];
  }
  big_lambda_ = lambda_sum_ + mu_sum + model_.c;

  const std::size_t J = model_.num_classes;
  const std::size_t S = lattice_->size();
  arrival_to_.assign(S * J, kOffLattice);
  service_to_.assign(S * J, kBlocked);
  LatticeState probe;
  for (std::size_t s = 0; s < S; ++s) {
    const LatticeState& k = lattice_->states[s];
    for (std::size_t j = 0; j < J; ++j) {
      probe = k;
      probe[j] += 1;
      if (auto idx = lattice_->find(probe))
        arrival_to_[s * J + j] = static_cast<long long>(*idx);
      // else the arrival leaves G and the jump reads the boundary value 1
      if (k[j] == 0) continue;  // service would leave the orthant: blocked
      probe = k;
      probe[j] -= 1;
      if (model_.route[j] != kExit)
        probe[static_cast<std::size_t>(model_.route[j])] += 1;
      if (auto idx = lattice_->find(probe)) {
        service_to_[s * J + j] = static_cast<long long>(*idx);
      } else {
        service_to_[s * J + j] = kOffLattice;  // fires, lands outside: reads 1
      }
    }
  }
}

double DpeSystem::apply_control(std::size_t state, const Vec& u, const Vec& w) const {
  const std::size_t J = model_.num_classes;
  double acc = 0.0;
  double moving = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const long long to = arrival_to_[state * J + j];
    acc += model_.lambda[j] * (to >= 0 ? w[static_cast<std::size_t>(to)] : 1.0);
  }
  for (std::size_t j = 0; j < J; ++j) {
    if (u[j] <= 0.0) continue;
    const long long to = service_to_[state * J + j];
    if (to == kBlocked) continue;
    const double rate = u[j] * model_.mu[j];
    acc += rate * (to >= 0 ? w[static_cast<std::size_t>(to)] : 1.0);
    moving += rate;
  }
  acc += (big_lambda_ - model_.c - lambda_sum_ - moving) * w[state];
  return acc / big_lambda_;
}

std::pair<double, std::size_t> DpeSystem::apply_min(std::size_t state,
                                                    const Vec& w) const {
  double best = apply_control(state, vertices_[0].u, w);
  std::size_t pick = 0;
  for (std::size_t v = 1; v < vertices_.size(); ++v) {
    const double val = apply_control(state, vertices_[v].u, w);
    if (val < best) {  // strict: ties keep the lowest vertex index
      best = val;
      pick = v;
    }
  }
  return {best, pick};
}

namespace {

double relative_change(double before, double after) {
  const double scale = std::max(std::fabs(after), 1e-300);
  return std::fabs(after - before) / scale;
}

}  // namespace

double DpeSystem::sweep_jacobi(const Vec& in, Vec& out, std::size_t workers) const {
  const std::size_t S = lattice_->size();
  std::atomic<double> worst{0.0};
  parallel_for(S, workers, [&](std::size_t begin, std::size_t end) {
    double local = 0.0;
    for (std::size_t s = begin; s < end; ++s) {
      out[s] = apply_min(s, in).first;
      local = std::max(local, relative_change(in[s], out[s]));
    }
    double seen = worst.load();
    while (local > seen && !worst.compare_exchange_weak(seen, local)) {
    }
  });
  return worst.load();
}

double DpeSystem::sweep_gauss_seidel(Vec& w) const {
  double worst = 0.0;
  for (std::size_t s = 0; s < lattice_->size(); ++s) {
    const double before = w[s];
    w[s] = apply_min(s, w).first;
    worst = std::max(worst, relative_change(before, w[s]));
  }
  return worst;
}

SolveResult solve_W(const NetworkModel& m, const Domain& d, int n,
                    const SolveOptions& options) {
  return solve_W(m, d, build_lattice(m, d, n), options);
}

SolveResult solve_W(const NetworkModel& m, const Domain& d,
                    std::shared_ptr<const Lattice> lattice,
                    const SolveOptions& options) {
  SolveResult res;
  res.w.lattice = lattice;
  res.w.off_lattice_value = 1.0;
  res.w.values.assign(lattice->size(), 1.0);
  if (lattice->size() == 0) {
    res.converged = true;
    return res;
  }

  DpeSystem system(m, lattice);
  if (options.gauss_seidel) {
    for (res.iterations = 0; res.iterations < options.max_iters;) {
      res.final_change = system.sweep_gauss_seidel(res.w.values);
      ++res.iterations;
      if (res.final_change <= options.tol) {
        res.converged = true;
        break;
      }
    }
    return res;
  }

  Vec next(lattice->size());
  for (res.iterations = 0; res.iterations < options.max_iters;) {
    res.final_change = system.sweep_jacobi(res.w.values, next, options.workers);
    res.w.values.swap(next);
    ++res.iterations;
    if (res.final_change <= options.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

LatticeField extract_V(const LatticeField& w) {
  LatticeField v;
  v.lattice = w.lattice;
  v.off_lattice_value = 0.0;
  v.values.resize(w.values.size());
  const double n = static_cast<double>(w.lattice->n);
  for (std::size_t s = 0; s < w.values.size(); ++s) {
    if (!(w.values[s] > 0.0))
      throw std::domain_error("extract_V: nonpositive exit-cost value");
    v.values[s] = -std::log(w.values[s]) / n;
  }
  return v;
}

PolicyField extract_policy(const NetworkModel& m, const Domain&,
                           const LatticeField& w) {
  DpeSystem system(m, w.lattice);
  PolicyField out;
  out.lattice = w.lattice;
  out.vertex.resize(w.lattice->size());
  for (std::size_t s = 0; s < w.lattice->size(); ++s)
    out.vertex[s] = system.apply_min(s, w.values).second;
  return out;
}

LatticeField dpe_residual(const NetworkModel& m, const Domain&,
                          const LatticeField& w) {
  DpeSystem system(m, w.lattice);
  LatticeField out;
  out.lattice = w.lattice;
  out.off_lattice_value = 0.0;
  out.values.resize(w.lattice->size());
  for (std::size_t s = 0; s < w.lattice->size(); ++s)
    out.values[s] = std::fabs(w.values[s] - system.apply_min(s, w.values).first);
  return out;
}

}  // namespace rsnet
