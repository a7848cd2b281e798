#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace rsnet {

using Vec = std::vector<double>;

// Route target meaning "the customer leaves the system".
inline constexpr int kExit = -1;

// Tolerance for boundary comparisons on continuum points. Lattice membership
// uses exact comparisons so that shared states stay bit-stable across scales.
inline constexpr double kGeomTol = 1e-12;

// Threshold deciding whether a coordinate sits on the nonnegativity
// constraint during reflection sweeps.
inline constexpr double kActiveTol = 1e-10;

/// A multiclass re-entrant line: J customer classes spread over K servers,
/// Poisson arrivals, exponential services and deterministic acyclic routing.
struct NetworkModel {
  std::size_t num_classes = 0;  ///< J
  std::size_t num_servers = 0;  ///< K
  /// serves[k] lists the classes handled by server k; the lists are disjoint
  /// and together cover every class.
  std::vector<std::vector<std::size_t>> serves;
  /// route[i] is the class a customer of class i becomes after service, or
  /// kExit when it leaves the system.
  std::vector<int> route;
  Vec lambda;      ///< arrival rate per class, >= 0
  Vec mu;          ///< service rate per class, > 0
  double c = 1.0;  ///< risk parameter, > 0

  /// Classes with positive arrival rate.
  std::vector<std::size_t> arrival_classes() const;
  bool has_arrivals(std::size_t i) const { return lambda[i] > 0.0; }
  /// Server handling class i; classes outside every list raise std::out_of_range.
  std::size_t server_of(std::size_t i) const;
};

/// Returns the list of violated structural invariants; empty means valid.
std::vector<std::string> validate_model(const NetworkModel& model);

/// A service allocation: effort fraction per class with per-server sums <= 1.
struct ControlVector {
  Vec u;
};

/// All extreme points of the allocation polytope. Per server the choices are
/// "idle" followed by full effort to each class of serves[k] in listed order;
/// the last server varies fastest, so index 0 is the all-idle vertex.
std::vector<ControlVector> control_vertices(const NetworkModel& model);

/// Perturbed arrival and service rates chosen by the minimizing player.
struct RatePerturbation {
  Vec lam_bar;
  Vec mu_bar;
  std::optional<double> cap;  ///< componentwise bound the rates were clamped to
};

/// The escape region G.
struct Domain {
  enum class Kind { Rect, WeightedCap };
  Kind kind = Kind::Rect;
  Vec z;           ///< Rect: per-class buffer bound (> 0)
  Vec w;           ///< WeightedCap: weights of the capped sum (> 0)
  double h = 0.0;  ///< WeightedCap: bound on sum_i w_i x_i
};

Domain rect_domain(Vec z);
Domain cap_domain(Vec w, double h);

/// Domain checks that depend on the owning model (sizes, positivity, and the
/// weighted-cap requirement that every class has arrivals).
std::vector<std::string> validate_domain(const NetworkModel& model,
                                         const Domain& domain);

/// Where a point of the closed orthant sits relative to G:
///  - Interior: strictly inside G, off every constraint;
///  - Reflecting: in G on the nonnegativity boundary (some x_i = 0);
///  - Blockable: in G on a closed buffer bound x_j = z_j of a class without
///    arrivals (rectangles only);
///  - Open: on the closure boundary through which the game ends;
///  - Outside: beyond the closure.
enum class BoundaryClass { Interior, Reflecting, Blockable, Open, Outside };

std::string to_string(BoundaryClass b);

BoundaryClass classify_point(const NetworkModel& model, const Domain& domain,
                             const Vec& x, double tol = kGeomTol);

/// True when the classification keeps the game running.
bool in_domain(BoundaryClass b);

using LatticeState = std::vector<int>;

/// Exact membership test of the scaled lattice point k/n in G.
bool lattice_in_domain(const NetworkModel& model, const Domain& domain,
                       const LatticeState& k, int n);

/// All lattice states k with k/n in G, emitted row-major with the last
/// coordinate varying fastest.
std::vector<LatticeState> enumerate_lattice(const NetworkModel& model,
                                            const Domain& domain, int n);

Vec lattice_to_point(const LatticeState& k, int n);

}  // namespace rsnet
