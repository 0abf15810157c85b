// Masked uniform grids over truncated domains and the Dirichlet Laplacian
// with Shortley-Weller arms at curved boundaries.
//
// Box faces are always Dirichlet nodes: where a face lies inside the domain
// it is an artificial truncation and takes the experiment's trace; where it
// does not, the true boundary is located by bisection along grid axes.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "epilab/core.hpp"
#include "epilab/geometry.hpp"

namespace epilab::discretization {

/// Dirichlet data g(x) evaluated at boundary points and truncation faces.
using Trace = std::function<double(const Coord&)>;

inline Trace zero_trace() {
  return [](const Coord&) { return 0.0; };
}

struct Box {
  int dim = 2;
  Coord lo{};
  Coord hi{};
};

/// Smallest arm fraction kept in the stencil.
inline constexpr double kMinTheta = 1e-3;

class DomainGrid {
 public:
  int dim() const { return dim_; }
  double h() const { return h_; }
  const Box& box() const { return box_; }
  const geometry::OpenSet& domain() const { return *domain_; }

  /// Nodes per axis (1 for unused axes).
  const std::array<int, kMaxDim>& counts() const { return counts_; }
  std::size_t lattice_size() const { return inside_.size(); }
  std::size_t size() const { return interior_.size(); }

  std::array<int, kMaxDim> multi_index(std::size_t id) const {
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(id % counts_[a]);
      id /= counts_[a];
    }
    return idx;
  }

  std::size_t lattice_id(const std::array<int, kMaxDim>& idx) const {
    std::size_t id = 0;
    for (int a = 0; a < dim_; ++a) id = id * counts_[a] + static_cast<std::size_t>(idx[a]);
    return id;
  }

  /// Coordinate along one axis. The upper half of the lattice is measured
  /// from hi so that a box with lo = -hi is mirror-symmetric bit for bit.
  double axis_coord(int axis, int i) const {
    const int last = counts_[axis] - 1;
    if (i == 0) return box_.lo[axis];
    if (i == last) return box_.hi[axis];
    if (2 * i == last) return 0.5 * (box_.lo[axis] + box_.hi[axis]);
    if (2 * i < last) return box_.lo[axis] + i * h_;
    return box_.hi[axis] - (last - i) * h_;
  }

  Coord coord(std::size_t id) const {
    const auto idx = multi_index(id);
    Coord c{};
    for (int a = 0; a < dim_; ++a) c[a] = axis_coord(a, idx[a]);
    return c;
  }

  /// Lattice neighbor one step along axis (side 0 = minus, 1 = plus).
  std::optional<std::size_t> neighbor(std::size_t id, int axis, int side) const {
    auto idx = multi_index(id);
    idx[axis] += side ? 1 : -1;
    if (idx[axis] < 0 || idx[axis] >= counts_[axis]) return std::nullopt;
    return lattice_id(idx);
  }

  bool on_box_face(std::size_t id) const {
    const auto idx = multi_index(id);
    for (int a = 0; a < dim_; ++a)
      if (idx[a] == 0 || idx[a] == counts_[a] - 1) return true;
    return false;
  }

  /// Equation index of a lattice node, or -1.
  long equation(std::size_t id) const { return node_index_[id]; }
  std::size_t lattice_of(std::size_t eq) const { return interior_[eq]; }
  bool inside(std::size_t id) const { return inside_[id] != 0; }

  /// Arm fraction in (0, 1]; 1 when the neighbor node is an interior or
  /// in-domain face node.
  double theta(std::size_t eq, int axis, int side) const {
    return theta_[(eq * dim_ + axis) * 2 + side];
  }

  /// Where the arm meets the boundary (or the face node when theta = 1).
  Coord arm_point(std::size_t eq, int axis, int side) const {
    Coord c = coord(interior_[eq]);
    const double t = theta(eq, axis, side);
    const auto nb = neighbor(interior_[eq], axis, side);
    if (t == 1.0 && nb) return coord(*nb);
    c[axis] += (side ? 1.0 : -1.0) * t * h_;
    return c;
  }

  /// True when every arm has theta = 1 (flat, grid-aligned boundaries).
  bool flat() const {
    for (double t : theta_)
      if (t != 1.0) return false;
    return true;
  }

  /// Box faces lying (partly) inside the domain: [axis][side].
  const std::array<std::array<bool, 2>, kMaxDim>& artificial_faces() const { return artificial_; }

  /// Distance in lattice steps to the nearest artificial face.
  int steps_to_artificial_face(std::size_t id) const {
    const auto idx = multi_index(id);
    int best = std::numeric_limits<int>::max();
    for (int a = 0; a < dim_; ++a) {
      if (artificial_[a][0]) best = std::min(best, idx[a]);
      if (artificial_[a][1]) best = std::min(best, counts_[a] - 1 - idx[a]);
    }
    return best;
  }

  /// Lattice position of a coordinate if it sits on a node (within 1e-9 h).
  std::optional<std::size_t> locate(const Coord& x) const {
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      const double s = (x[a] - box_.lo[a]) / h_;
      const double r = std::round(s);
      if (std::abs(s - r) > 1e-9 || r < 0 || r > counts_[a] - 1) return std::nullopt;
      idx[a] = static_cast<int>(r);
    }
    return lattice_id(idx);
  }

 private:
  friend DomainGrid build_grid(std::shared_ptr<const geometry::OpenSet>, const Box&, double);

  int dim_ = 2;
  double h_ = 0.0;
  Box box_;
  std::shared_ptr<const geometry::OpenSet> domain_;
  std::array<int, kMaxDim> counts_{1, 1, 1};
  std::vector<char> inside_;
  std::vector<long> node_index_;
  std::vector<std::size_t> interior_;
  std::vector<double> theta_;
  std::array<std::array<bool, 2>, kMaxDim> artificial_{};
};

/// Builds the mask, equation numbering and arm fractions. Fractions come
/// from bisection on the membership predicate, run to full precision; a
/// crossing within 1e-9 h of the neighbor node snaps to theta = 1, so the
/// neighbor itself carries the Dirichlet value.
inline DomainGrid build_grid(std::shared_ptr<const geometry::OpenSet> domain, const Box& box,
                             double h) {
  require(domain != nullptr, "grid: domain is null");
  require(h > 0.0 && std::isfinite(h), "grid: h must be positive");
  require(box.dim == domain->dim(), "grid: box and domain dimensions differ");
  DomainGrid g;
  g.dim_ = box.dim;
  g.h_ = h;
  g.box_ = box;
  g.domain_ = std::move(domain);
  std::size_t total = 1;
  for (int a = 0; a < box.dim; ++a) {
    const double len = box.hi[a] - box.lo[a];
    require(len > 0.0, "grid: box is degenerate along axis " + std::to_string(a));
    const double steps = std::round(len / h);
    require(std::abs(steps * h - len) <= 1e-9 * std::max(1.0, len),
            "grid: box extent along axis " + std::to_string(a) + " is not a multiple of h");
    require(steps >= 2, "grid: need at least two cells per axis");
    g.counts_[a] = static_cast<int>(steps) + 1;
    total *= static_cast<std::size_t>(g.counts_[a]);
  }

  g.inside_.resize(total);
  g.node_index_.assign(total, -1);
  for (std::size_t id = 0; id < total; ++id) {
    g.inside_[id] = g.domain_->contains(g.coord(id)) ? 1 : 0;
    if (g.inside_[id] && !g.on_box_face(id)) {
      g.node_index_[id] = static_cast<long>(g.interior_.size());
      g.interior_.push_back(id);
    }
    if (g.inside_[id]) {
      const auto idx = g.multi_index(id);
      for (int a = 0; a < g.dim_; ++a) {
        if (idx[a] == 0) g.artificial_[a][0] = true;
        if (idx[a] == g.counts_[a] - 1) g.artificial_[a][1] = true;
      }
    }
  }
  if (g.interior_.empty()) fail(ErrorKind::validation, "grid: empty interior");

  const int dim = g.dim_;
  g.theta_.assign(g.interior_.size() * dim * 2, 1.0);
  parallel_for(g.interior_.size(), [&](std::size_t eq) {
    const std::size_t id = g.interior_[eq];
    const Coord x = g.coord(id);
    for (int a = 0; a < dim; ++a) {
      for (int side = 0; side < 2; ++side) {
        const std::size_t nb = *g.neighbor(id, a, side);
        if (g.inside_[nb]) continue;
        const double dir = side ? h : -h;
        double lo = 0.0, hi = 1.0;  // inside at lo, outside at hi
        for (int it = 0; it < 64; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          Coord p = x;
          p[a] += mid * dir;
          if (g.domain_->contains(p)) lo = mid;
          else hi = mid;
        }
        double t = 0.5 * (lo + hi);
        if (1.0 - t <= 1e-9) t = 1.0;  // boundary passes through the neighbor node
        g.theta_[(eq * dim + a) * 2 + side] = t;
      }
    }
  });

  // Nodes within kMinTheta h of the boundary are treated as boundary nodes
  // carrying the trace; keeping them would put weights ~ 1/theta^2 in A.
  std::vector<std::size_t> kept;
  std::vector<double> kept_theta;
  kept.reserve(g.interior_.size());
  kept_theta.reserve(g.theta_.size());
  for (std::size_t eq = 0; eq < g.interior_.size(); ++eq) {
    const auto first = g.theta_.begin() + static_cast<std::ptrdiff_t>(eq * dim * 2);
    const double smallest = *std::min_element(first, first + dim * 2);
    const std::size_t id = g.interior_[eq];
    if (smallest < kMinTheta) {
      g.node_index_[id] = -1;
      continue;
    }
    g.node_index_[id] = static_cast<long>(kept.size());
    kept.push_back(id);
    kept_theta.insert(kept_theta.end(), first, first + dim * 2);
  }
  g.interior_ = std::move(kept);
  g.theta_ = std::move(kept_theta);
  if (g.interior_.empty()) fail(ErrorKind::validation, "grid: empty interior");
  return g;
}

inline DomainGrid build_grid(const geometry::OpenSet& domain, const Box& box, double h) {
  return build_grid(std::make_shared<const geometry::OpenSet>(domain), box, h);
}

/// Writes one row per lattice node: coordinates, mask, equation index and
/// the 2N arm fractions (empty for non-interior nodes).
inline void dump_grid_csv(const DomainGrid& g, std::ostream& os) {
  os.precision(17);
  for (int a = 0; a < g.dim(); ++a) os << "x" << (a + 1) << ",";
  os << "inside,equation";
  for (int a = 0; a < g.dim(); ++a) os << ",theta_minus_" << (a + 1) << ",theta_plus_" << (a + 1);
  os << "\r\n";
  for (std::size_t id = 0; id < g.lattice_size(); ++id) {
    const Coord c = g.coord(id);
    for (int a = 0; a < g.dim(); ++a) os << c[a] << ",";
    os << (g.inside(id) ? 1 : 0) << "," << g.equation(id);
    const long eq = g.equation(id);
    for (int a = 0; a < g.dim(); ++a) {
      if (eq >= 0)
        os << "," << g.theta(eq, a, 0) << "," << g.theta(eq, a, 1);
      else
        os << ",,";
    }
    os << "\r\n";
  }
}

// ---------------------------------------------------------------------------
// Sparse operator
// ---------------------------------------------------------------------------

class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols,
                 std::vector<double> vals)
      : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), vals_(std::move(vals)) {
    require(row_ptr_.size() == n_ + 1, "sparse: row pointer size mismatch");
    symmetric_ = check_symmetric();
  }

  std::size_t size() const { return n_; }
  bool symmetric() const { return symmetric_; }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& cols() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }

  double diagonal(std::size_t i) const {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (cols_[k] == i) return vals_[k];
    return 0.0;
  }

  /// y = A x, rows summed in storage order.
  void apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != n_ || y.size() != n_) fail(ErrorKind::validation, "apply: dimension mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
      y[i] = s;
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(n_);
    apply(x, y);
    return y;
  }

  /// A - diag(d); the sparsity pattern keeps the diagonal entry of each row.
  SparseOperator shifted(std::span<const double> d) const {
    require(d.size() == n_, "shifted: dimension mismatch");
    SparseOperator out = *this;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        if (cols_[k] == i) out.vals_[k] -= d[i];
    return out;
  }

 private:
  bool check_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const std::size_t j = cols_[k];
        if (j == i) continue;
        bool found = false;
        for (std::size_t m = row_ptr_[j]; m < row_ptr_[j + 1]; ++m) {
          if (cols_[m] == i) {
            found = vals_[m] == vals_[k];
            break;
          }
        }
        if (!found) return false;
      }
    }
    return true;
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
  bool symmetric_ = true;
};

inline std::vector<double> apply(const SparseOperator& op, std::span<const double> x) {
  return op.apply(x);
}

/// Coefficient of a Dirichlet value in the row of `equation`.
struct BoundaryTerm {
  std::size_t equation;
  double coefficient;
  Coord point;
};

struct DirichletLaplacian {
  SparseOperator op;
  std::vector<BoundaryTerm> boundary;
};

namespace detail {

struct ArmWeights {
  double center, minus, plus;
};

/// Nonuniform three-point -u'' with arms theta_m h and theta_p h.
inline ArmWeights arm_weights(double tm, double tp, double h) {
  const double s = 2.0 / (h * h * (tm + tp));
  return {s * (1.0 / tm + 1.0 / tp), s / tm, s / tp};
}

}  // namespace detail

/// Assembles -Delta_h over the interior equations in lattice order.
/// Quadratics are reproduced exactly at every interior node.
inline DirichletLaplacian assemble_laplacian(const DomainGrid& g) {
  const std::size_t n = g.size();
  const int dim = g.dim();
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(n * (2 * dim + 1));
  vals.reserve(n * (2 * dim + 1));
  std::vector<BoundaryTerm> boundary;

  for (std::size_t eq = 0; eq < n; ++eq) {
    const std::size_t id = g.lattice_of(eq);
    // Collect (column, value) pairs, then emit sorted by column.
    std::vector<std::pair<std::size_t, double>> row;
    double diag = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double tm = g.theta(eq, a, 0), tp = g.theta(eq, a, 1);
      const auto w = detail::arm_weights(tm, tp, g.h());
      diag += w.center;
      for (int side = 0; side < 2; ++side) {
        const double coeff = side ? w.plus : w.minus;
        const auto nb = g.neighbor(id, a, side);
        const long nb_eq = nb ? g.equation(*nb) : -1;
        if (g.theta(eq, a, side) == 1.0 && nb_eq >= 0)
          row.emplace_back(static_cast<std::size_t>(nb_eq), -coeff);
        else
          boundary.push_back({eq, coeff, g.arm_point(eq, a, side)});
      }
    }
    row.emplace_back(eq, diag);
    std::sort(row.begin(), row.end());
    for (const auto& [c, v] : row) {
      cols.push_back(c);
      vals.push_back(v);
    }
    row_ptr[eq + 1] = cols.size();
  }
  return {SparseOperator(n, std::move(row_ptr), std::move(cols), std::move(vals)), std::move(boundary)};
}

/// Right-hand side contribution of the Dirichlet data.
inline std::vector<double> boundary_load(const DirichletLaplacian& lap, const Trace& trace) {
  std::vector<double> b(lap.op.size(), 0.0);
  for (const auto& t : lap.boundary) b[t.equation] += t.coefficient * trace(t.point);
  return b;
}

/// -Delta_h u evaluated straight from the arm fractions (no matrix): used as
/// an independent residual check of assembled-operator results.
inline std::vector<double> stencil_apply(const DomainGrid& g, std::span<const double> u,
                                         const Trace& trace) {
  require(u.size() == g.size(), "stencil_apply: dimension mismatch");
  const int dim = g.dim();
  const double h = g.h();
  std::vector<double> out(g.size(), 0.0);
  for (int a = 0; a < dim; ++a) {
    for (std::size_t eq = 0; eq < g.size(); ++eq) {
      const std::size_t id = g.lattice_of(eq);
      double val[2];
      double arm[2];
      for (int side = 0; side < 2; ++side) {
        arm[side] = g.theta(eq, a, side) * h;
        const auto nb = g.neighbor(id, a, side);
        const long nb_eq = nb ? g.equation(*nb) : -1;
        if (g.theta(eq, a, side) == 1.0 && nb_eq >= 0) val[side] = u[nb_eq];
        else val[side] = trace(g.arm_point(eq, a, side));
      }
      const double slope_plus = (val[1] - u[eq]) / arm[1];
      const double slope_minus = (u[eq] - val[0]) / arm[0];
      out[eq] -= 2.0 * (slope_plus - slope_minus) / (arm[0] + arm[1]);
    }
  }
  return out;
}

/// Samples fn at the interior nodes.
inline std::vector<double> sample(const DomainGrid& g, const std::function<double(const Coord&)>& fn) {
  std::vector<double> v(g.size());
  for (std::size_t eq = 0; eq < g.size(); ++eq) v[eq] = fn(g.coord(g.lattice_of(eq)));
  return v;
}

}  // namespace epilab::discretization
