#pragma once

#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rsnet/network.hpp"

namespace rsnet {

struct LatticeStateHash {
  std::size_t operator()(const LatticeState& k) const;
};

/// Immutable index of the lattice states of G at scale n. Safe to share
/// between fields once built.
struct Lattice {
  int n = 1;
  std::vector<LatticeState> states;
  std::unordered_map<LatticeState, std::size_t, LatticeStateHash> index;

  std::optional<std::size_t> find(const LatticeState& k) const;
  std::size_t size() const { return states.size(); }
};

std::shared_ptr<const Lattice> build_lattice(const NetworkModel& model,
                                             const Domain& domain, int n);

/// Scalar field over the lattice states; anything outside the lattice reads
/// as off_lattice_value (1 for exit-cost fields, 0 for value and residual
/// fields).
struct LatticeField {
  std::shared_ptr<const Lattice> lattice;
  Vec values;
  double off_lattice_value = 1.0;
};

/// Chosen control-vertex index per lattice state.
struct PolicyField {
  std::shared_ptr<const Lattice> lattice;
  std::vector<std::size_t> vertex;
};

/// Uniformized one-step operator of the exit-cost fixed point. States one
/// jump outside the lattice read as 1; a service whose source coordinate is
/// already zero cannot fire and leaves its rate on the diagonal.
class DpeSystem {
 public:
  DpeSystem(const NetworkModel& model, std::shared_ptr<const Lattice> lattice);

  double uniformization_rate() const { return big_lambda_; }
  const std::vector<ControlVector>& vertices() const { return vertices_; }
  const std::shared_ptr<const Lattice>& lattice() const { return lattice_; }

  /// Operator bracket at one state for an arbitrary allocation, already
  /// divided by the uniformization rate.
  double apply_control(std::size_t state, const Vec& u, const Vec& w) const;

  /// Minimum over the control vertices: (value, vertex index); ties keep the
  /// lowest index.
  std::pair<double, std::size_t> apply_min(std::size_t state, const Vec& w) const;

  /// One Jacobi sweep in into out; returns the largest relative change.
  double sweep_jacobi(const Vec& in, Vec& out, std::size_t workers) const;

  /// One in-place sweep in state order; returns the largest relative change.
  double sweep_gauss_seidel(Vec& w) const;

 private:
  static constexpr long long kBlocked = -2;
  static constexpr long long kOffLattice = -1;

  const NetworkModel& model_;
  std::shared_ptr<const Lattice> lattice_;
  std::vector<ControlVector> vertices_;
  double big_lambda_ = 0.0;
  double lambda_sum_ = 0.0;
  std::vector<long long> arrival_to_;  ///< state*J + j
  std::vector<long long> service_to_;  ///< state*J + j
};

struct SolveOptions {
  /// Per-sweep relative sup change below which iteration stops. Relative
  /// (not absolute) because the fixed point spans many orders of magnitude
  /// and the extracted value amplifies errors by 1/(n W).
  double tol = 1e-10;
  std::size_t max_iters = 200000;
  bool gauss_seidel = false;
  std::size_t workers = 1;
};

struct SolveResult {
  LatticeField w;
  std::size_t iterations = 0;
  double final_change = 0.0;
  bool converged = false;
};

/// Value iteration from the constant 1 field; iterates decrease monotonically
/// to the fixed point. On max_iters exhaustion the partial field is returned
/// with converged = false.
SolveResult solve_W(const NetworkModel& model, const Domain& domain, int n,
                    const SolveOptions& options = {});
SolveResult solve_W(const NetworkModel& model, const Domain& domain,
                    std::shared_ptr<const Lattice> lattice,
                    const SolveOptions& options = {});

/// V = -log(W)/n per state, 0 outside the lattice. Throws on W <= 0.
LatticeField extract_V(const LatticeField& w);

/// Minimizing control vertex per state; ties keep the lowest vertex index,
/// so fully blocked states pick the all-idle vertex 0.
PolicyField extract_policy(const NetworkModel& model, const Domain& domain,
                           const LatticeField& w);

/// |W - (TW)| per state, 0 outside the lattice.
LatticeField dpe_residual(const NetworkModel& model, const Domain& domain,
                          const LatticeField& w);

}  // namespace rsnet
