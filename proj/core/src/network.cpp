#include "rsnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rsnet {

std::vector<std::size_t> NetworkModel::arrival_classes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < num_classes; ++i)
    if (lambda[i] > 0.0) out.push_back(i);
  return out;
}

std::size_t NetworkModel::server_of(std::size_t i) const {
  for (std::size_t k = 0; k < serves.size(); ++k)
    for (std::size_t cls : serves[k])
      if (cls == i) return k;
  throw std::out_of_range("server_of: class not assigned to any server");
}

std::vector<std::string> validate_model(const NetworkModel& m) {
  std::vector<std::string> bad;
  auto complain = [&bad](const std::string& msg) { bad.push_back(msg); };

  const std::size_t J = m.num_classes;
  if (J == 0) complain("model must have at least one class");
  if (m.num_servers == 0) complain("model must have at least one server");
  if (m.serves.size() != m.num_servers)
    complain("serves must list exactly one class set per server");
  if (m.route.size() != J) complain("route must have one entry per class");
  if (m.lambda.size() != J) complain("lambda must have one entry per class");
  if (m.mu.size() != J) complain("mu must have one entry per class");
  if (!(m.c > 0.0)) complain("risk parameter c must be positive");
  if (!bad.empty()) return bad;  // size errors make index checks unsafe

  // serves must partition {0..J-1}.
  std::vector<int> owner(J, -1);
  for (std::size_t k = 0; k < m.serves.size(); ++k) {
    for (std::size_t cls : m.serves[k]) {
      if (cls >= J) {
        std::ostringstream os;
        os << "serves: class index " << cls + 1 << " out of range";
        complain(os.str());
        continue;
      }
      if (owner[cls] >= 0) {
        std::ostringstream os;
        os << "serves: class " << cls + 1 << " assigned to multiple servers";
        complain(os.str());
      }
      owner[cls] = static_cast<int>(k);
    }
  }
  for (std::size_t i = 0; i < J; ++i) {
    if (owner[i] < 0) {
      std::ostringstream os;
      os << "serves: class " << i + 1 << " not assigned to any server";
      complain(os.str());
    }
  }

  for (std::size_t i = 0; i < J; ++i) {
    if (m.route[i] != kExit &&
        (m.route[i] < 0 || static_cast<std::size_t>(m.route[i]) >= J)) {
      std::ostringstream os;
      os << "route target out of range (class " << i + 1 << ")";
      complain(os.str());
    }
  }

  // Routes must reach the exit within J hops, i.e. contain no cycle.
  for (std::size_t i = 0; i < J; ++i) {
    int cur = static_cast<int>(i);
    bool exits = false;
    for (std::size_t hop = 0; hop <= J; ++hop) {
      if (cur == kExit) {
        exits = true;
        break;
      }
      if (cur < 0 || static_cast<std::size_t>(cur) >= J) break;  // already reported
      cur = m.route[static_cast<std::size_t>(cur)];
    }
    if (!exits && cur != kExit) {
      std::ostringstream os;
      os << "cyclic routing: class " << i + 1 << " never reaches the exit";
      complain(os.str());
      break;  // one report is enough, every class on the cycle repeats it
    }
  }

  for (std::size_t i = 0; i < J; ++i) {
    if (!(m.mu[i] > 0.0)) {
      std::ostringstream os;
      os << "service rate must be positive (class " << i + 1 << ")";
      complain(os.str());
    }
    if (m.lambda[i] < 0.0) {
      std::ostringstream os;
      os << "arrival rate must be nonnegative (class " << i + 1 << ")";
      complain(os.str());
    }
  }
  return bad;
}

std::vector<ControlVector> control_vertices(const NetworkModel& m) {
  const std::size_t J = m.num_classes;
  // Per server the choices are: idle (0), then serve each listed class.
  std::vector<std::size_t> sizes(m.num_servers);
  std::size_t total = 1;
  for (std::size_t k = 0; k < m.num_servers; ++k) {
    sizes[k] = m.serves[k].size() + 1;
    total *= sizes[k];
  }
  std::vector<ControlVector> out;
  out.reserve(total);
  std::vector<std::size_t> choice(m.num_servers, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    ControlVector v;
    v.u.assign(J, 0.0);
    for (std::size_t k = 0; k < m.num_servers; ++k)
      if (choice[k] > 0) v.u[m.serves[k][choice[k] - 1]] = 1.0;
    out.push_back(std::move(v));
    // Odometer with the last server varying fastest.
    for (std::size_t k = m.num_servers; k-- > 0;) {
      if (++choice[k] < sizes[k]) break;
      choice[k] = 0;
    }
  }
  return out;
}

Domain rect_domain(Vec z) {
  Domain d;
  d.kind = Domain::Kind::Rect;
  d.z = std::move(z);
  return d;
}

Domain cap_domain(Vec w, double h) {
  Domain d;
  d.kind = Domain::Kind::WeightedCap;
  d.w = std::move(w);
  d.h = h;
  return d;
}

std::vector<std::string> validate_domain(const NetworkModel& m, const Domain& d) {
  std::vector<std::string> bad;
  const std::size_t J = m.num_classes;
  if (d.kind == Domain::Kind::Rect) {
    if (d.z.size() != J) {
      bad.push_back("domain bound z must have one entry per class");
      return bad;
    }
    for (std::size_t i = 0; i < J; ++i) {
      if (!(d.z[i] > 0.0)) {
        std::ostringstream os;
        os << "domain bound z must be positive (class " << i + 1 << ")";
        bad.push_back(os.str());
      }
    }
  } else {
    if (d.w.size() != J) {
      bad.push_back("domain weights w must have one entry per class");
      return bad;
    }
    for (std::size_t i = 0; i < J; ++i) {
      if (!(d.w[i] > 0.0)) {
        std::ostringstream os;
        os << "domain weight w must be positive (class " << i + 1 << ")";
        bad.push_back(os.str());
      }
    }
    if (!(d.h > 0.0)) bad.push_back("domain cap h must be positive");
    for (std::size_t i = 0; i < J; ++i) {
      if (!(m.lambda[i] > 0.0)) {
        bad.push_back("weighted-cap domain requires every class to have arrivals");
        break;
      }
    }
  }
  return bad;
}

std::string to_string(BoundaryClass b) {
  switch (b) {
    case BoundaryClass::Interior: return "interior";
    case BoundaryClass::Reflecting: return "reflecting";
    case BoundaryClass::Blockable: return "blockable";
    case BoundaryClass::Open: return "open";
    case BoundaryClass::Outside: return "outside";
  }
  return "?";
}

bool in_domain(BoundaryClass b) {
  return b == BoundaryClass::Interior || b == BoundaryClass::Reflecting ||
         b == BoundaryClass::Blockable;
}

BoundaryClass classify_point(const NetworkModel& m, const Domain& d, const Vec& x,
                             double tol) {
  const std::size_t J = m.num_classes;
  if (x.size() != J) throw std::invalid_argument("classify_point: wrong dimension");
  for (double xi : x)
    if (xi < -tol) throw std::domain_error("classify_point: negative coordinate");

  if (d.kind == Domain::Kind::Rect) {
    // Beyond the closure in any coordinate wins over every other test.
    for (std::size_t i = 0; i < J; ++i)
      if (x[i] > d.z[i] + tol) return BoundaryClass::Outside;
    // Reaching the bound of a class with arrivals ends the game.
    for (std::size_t i = 0; i < J; ++i)
      if (m.has_arrivals(i) && x[i] >= d.z[i] - tol) return BoundaryClass::Open;
    for (std::size_t i = 0; i < J; ++i)
      if (!m.has_arrivals(i) && x[i] >= d.z[i] - tol) return BoundaryClass::Blockable;
    for (std::size_t i = 0; i < J; ++i)
      if (x[i] <= tol) return BoundaryClass::Reflecting;
    return BoundaryClass::Interior;
  }

  double s = 0.0;
  for (std::size_t i = 0; i < J; ++i) s += d.w[i] * x[i];
  if (s > d.h + tol) return BoundaryClass::Outside;
  if (s >= d.h - tol) return BoundaryClass::Open;
  for (std::size_t i = 0; i < J; ++i)
    if (x[i] <= tol) return BoundaryClass::Reflecting;
  return BoundaryClass::Interior;
}

bool lattice_in_domain(const NetworkModel& m, const Domain& d, const LatticeState& k,
                       int n) {
  const std::size_t J = m.num_classes;
  if (k.size() != J) throw std::invalid_argument("lattice_in_domain: wrong dimension");
  if (n < 1) throw std::invalid_argument("lattice_in_domain: n must be >= 1");
  for (int ki : k)
    if (ki < 0) return false;
  const double dn = static_cast<double>(n);
  if (d.kind == Domain::Kind::Rect) {
    for (std::size_t i = 0; i < J; ++i) {
      const double xi = static_cast<double>(k[i]) / dn;
      if (m.has_arrivals(i)) {
        if (!(xi < d.z[i])) return false;  // open bound
      } else {
        if (!(xi <= d.z[i])) return false;  // closed bound
      }
    }
    return true;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < J; ++i) s += d.w[i] * (static_cast<double>(k[i]) / dn);
  return s < d.h;
}

std::vector<LatticeState> enumerate_lattice(const NetworkModel& m, const Domain& d,
                                            int n) {
  if (n < 1) throw std::invalid_argument("enumerate_lattice: n must be >= 1");
  const std::size_t J = m.num_classes;
  const double dn = static_cast<double>(n);

  // Largest admissible coordinate value per axis (with the others at zero).
  std::vector<int> kmax(J, 0);
  for (std::size_t i = 0; i < J; ++i) {
    int hi = 0;
    if (d.kind == Domain::Kind::Rect) {
      while (true) {
        const double xi = static_cast<double>(hi + 1) / dn;
        const bool ok = m.has_arrivals(i) ? (xi < d.z[i]) : (xi <= d.z[i]);
        if (!ok) break;
        ++hi;
      }
    } else {
      while (d.w[i] * (static_cast<double>(hi + 1) / dn) < d.h) ++hi;
    }
    kmax[i] = hi;
  }

  std::vector<LatticeState> out;
  LatticeState k(J, 0);
  while (true) {
    if (lattice_in_domain(m, d, k, n)) out.push_back(k);
    // Row-major odometer, last coordinate fastest.
    bool advanced = false;
    for (std::size_t i = J; i-- > 0;) {
      if (++k[i] <= kmax[i]) {
        advanced = true;
        break;
      }
      k[i] = 0;
    }
    if (!advanced) return out;
  }
}

Vec lattice_to_point(const LatticeState& k, int n) {
  Vec x(k.size());
  for (std::size_t i = 0; i < k.size(); ++i)
    x[i] = static_cast<double>(k[i]) / static_cast<double>(n);
  return x;
}

}  // namespace rsnet
