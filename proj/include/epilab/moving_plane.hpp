// Reflections across horizontal planes, cap comparisons u <= u_lambda and
// the slope identity on the reflection plane.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "epilab/core.hpp"
#include "epilab/geometry.hpp"
#include "epilab/solver.hpp"

namespace epilab::moving_plane {

using discretization::DomainGrid;
using solver::SolutionField;

namespace detail {

/// u at (x', y) where x' is the column of lattice node `id` and y is any
/// height in the box. Lattice heights are read directly; otherwise a cubic
/// Lagrange interpolant along x_N is used and `bound` receives its error
/// estimate |prod (s - s_i)| |Delta^4 u| / 24.
inline double column_value(const SolutionField& u, std::size_t id, double y, double& bound, bool& exact) {
  const DomainGrid& g = *u.grid;
  const int last = g.dim() - 1;
  const int count = g.counts()[last];
  const double lo = g.box().lo[last], hi = g.box().hi[last];
  const double h = g.h();
  if (y < lo - 1e-9 * h || y > hi + 1e-9 * h)
    fail(ErrorKind::geometry, "reflection leaves window: height " + ExtReal(y).str() + " outside [" +
                                  ExtReal(lo).str() + ", " + ExtReal(hi).str() + "]");
  auto idx = g.multi_index(id);
  auto at = [&](int k) {
    idx[last] = k;
    return u.at_lattice(g.lattice_id(idx));
  };
  const double s = (y - lo) / h;
  const double r = std::round(s);
  bound = 0.0;
  if (std::abs(s - r) <= 1e-9) {
    exact = true;
    return at(static_cast<int>(r));
  }
  exact = false;
  require(count >= 4, "reflection: need at least four nodes along x_N to interpolate");
  const int k = static_cast<int>(std::floor(s));
  const int first = std::clamp(k - 1, 0, count - 4);
  double val = 0.0, prod = 1.0;
  double v[4];
  for (int i = 0; i < 4; ++i) v[i] = at(first + i);
  for (int i = 0; i < 4; ++i) {
    double w = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) w *= (s - (first + j)) / static_cast<double>(i - j);
    val += w * v[i];
    prod *= s - (first + i);
  }
  if (count >= 5) {
    const int m = std::clamp(first, 0, count - 5);
    const double d4 = at(m) - 4.0 * at(m + 1) + 6.0 * at(m + 2) - 4.0 * at(m + 3) + at(m + 4);
    bound = std::abs(prod) * std::abs(d4) / 24.0;
  }
  return val;
}

}  // namespace detail

/// u_lambda(x) = u(x', 2 lambda - x_N) at interior nodes.
struct ReflectedField {
  SolutionField field;          // NaN at nodes outside the evaluated region
  double lambda = 0.0;
  bool exact = true;            // every evaluated node mapped onto a lattice node
  double interpolation_bound = 0.0;
};

using Region = std::function<bool(std::size_t equation)>;

/// Reflects u across {x_N = lambda}. Nodes outside `region` (default: all
/// interior nodes) are left as NaN; the trace is reflected too.
inline ReflectedField reflect_field(const SolutionField& u, double lambda, const Region& region = nullptr) {
  const DomainGrid& g = *u.grid;
  const int dim = g.dim();
  ReflectedField out;
  out.lambda = lambda;
  out.field.grid = u.grid;
  out.field.values.assign(g.size(), std::numeric_limits<double>::quiet_NaN());
  auto base = u.trace;
  out.field.trace = [base, lambda, dim](const Coord& x) { return base(geometry::reflect(x, dim, lambda)); };
  out.field.trace_label = u.trace_label + " reflected";
  out.field.method = u.method;
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    if (region && !region(eq)) continue;
    const std::size_t id = g.lattice_of(eq);
    const double y = 2.0 * lambda - g.coord(id)[dim - 1];
    double bound = 0.0;
    bool exact = true;
    out.field.values[eq] = detail::column_value(u, id, y, bound, exact);
    out.exact = out.exact && exact;
    out.interpolation_bound = std::max(out.interpolation_bound, bound);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cap sweep
// ---------------------------------------------------------------------------

struct CapResult {
  double lambda = 0.0;
  double min_diff = 0.0;          // min of u_lambda - u over the cap; 0 for an empty cap
  std::size_t nodes = 0;
  double interpolation_bound = 0.0;
  Coord witness{};                // argmin location
};

struct SlopeSample {
  Coord x{};
  double dn_u = 0.0;
};

struct MovingPlaneReport {
  std::vector<CapResult> caps;
  std::optional<double> monotone_up_to;   // none if the first lambda already fails
  double tol = 1e-8;
  double dn_u_min = std::numeric_limits<double>::infinity();
  std::vector<SlopeSample> slopes;        // window interior, lattice order
  std::vector<Coord> sign_change_cells;   // lower node of each sign change along x_N
  std::optional<double> zero_slope_from;  // lowest height above which |dn_u| <= tol
  std::string window;                     // box and buffer the statements refer to

  std::vector<double> lambda_grid() const {
    std::vector<double> l;
    for (const auto& c : caps) l.push_back(c.lambda);
    return l;
  }
  double min_cap_diff() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : caps)
      if (c.nodes > 0) m = std::min(m, c.min_diff);
    return m;
  }
  /// max |dn_u| over sampled nodes with x_N > level.
  double max_abs_slope_above(double level, int dim) const {
    double m = 0.0;
    for (const auto& s : slopes)
      if (s.x[dim - 1] > level) m = std::max(m, std::abs(s.dn_u));
    return m;
  }
};

inline constexpr int kBufferSteps = 3;

/// lambda = 2h, 2h + step, ... up to lambda_max.
inline std::vector<double> default_lambda_grid(const DomainGrid& g, double lambda_max, double step) {
  require(step > 0.0, "lambda grid: step must be positive");
  std::vector<double> l;
  const double start = g.box().lo[g.dim() - 1] + 2.0 * g.h();
  for (int k = 0;; ++k) {
    const double v = start + k * step;
    if (v > lambda_max + 1e-12) break;
    l.push_back(v);
  }
  return l;
}

/// x_N-derivative at an interior node from its two arms along x_N: the
/// three-point formula (a^2 (u_b - u_0) + b^2 (u_0 - u_a)) / (a b (a + b)),
/// centred when both arms are full.
inline double dn_at(const SolutionField& u, std::size_t eq) {
  const DomainGrid& g = *u.grid;
  const int last = g.dim() - 1;
  const std::size_t id = g.lattice_of(eq);
  double val[2], arm[2];
  for (int side = 0; side < 2; ++side) {
    arm[side] = g.theta(eq, last, side) * g.h();
    const auto nb = g.neighbor(id, last, side);
    if (g.theta(eq, last, side) == 1.0 && nb) val[side] = u.at_lattice(*nb);
    else val[side] = u.trace(g.arm_point(eq, last, side));
  }
  const double a = arm[0], b = arm[1], u0 = u.values[eq];
  return (a * a * (val[1] - u0) + b * b * (u0 - val[0])) / (a * b * (a + b));
}

/// For each lambda, min over cap nodes (g(x') < x_N < lambda, at least
/// kBufferSteps from artificial faces) of u_lambda - u. monotone_up_to is
/// the last lambda before the first value below -(tol + interpolation bound).
inline MovingPlaneReport cap_sweep(const SolutionField& u, const geometry::EpigraphSpec& spec,
                                   const std::vector<double>& lambda_grid, double tol = 1e-8) {
  require(tol >= 0.0, "cap_sweep: tol must be >= 0");
  require(!lambda_grid.empty(), "cap_sweep: empty lambda grid");
  require(std::is_sorted(lambda_grid.begin(), lambda_grid.end()), "cap_sweep: lambda grid must increase");
  const DomainGrid& g = *u.grid;
  const int dim = g.dim();
  require(spec.dimension == dim, "cap_sweep: epigraph dimension does not match the grid");
  for (double l : lambda_grid) require(l > 0.0, "cap_sweep: lambda must be positive");

  MovingPlaneReport rep;
  rep.tol = tol;
  {
    std::ostringstream w;
    w.precision(17);
    w << "box [";
    for (int a = 0; a < dim; ++a) w << (a ? "," : "") << g.box().lo[a];
    w << "]-[";
    for (int a = 0; a < dim; ++a) w << (a ? "," : "") << g.box().hi[a];
    w << "], h = " << g.h() << ", buffer " << kBufferSteps << "h";
    rep.window = w.str();
  }

  std::vector<char> buffered(g.size());
  for (std::size_t eq = 0; eq < g.size(); ++eq)
    buffered[eq] = g.steps_to_artificial_face(g.lattice_of(eq)) >= kBufferSteps;

  rep.caps.resize(lambda_grid.size());
  parallel_for(lambda_grid.size(), [&](std::size_t k) {
    const double lambda = lambda_grid[k];
    CapResult c;
    c.lambda = lambda;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t eq = 0; eq < g.size(); ++eq) {
      if (!buffered[eq]) continue;
      const std::size_t id = g.lattice_of(eq);
      const Coord x = g.coord(id);
      if (!geometry::cap_membership(spec, view(x, dim), lambda)) continue;
      double bound = 0.0;
      bool exact = true;
      const double ul = detail::column_value(u, id, 2.0 * lambda - x[dim - 1], bound, exact);
      const double d = ul - u.values[eq];
      ++c.nodes;
      c.interpolation_bound = std::max(c.interpolation_bound, bound);
      if (d < best) {
        best = d;
        c.witness = x;
      }
    }
    c.min_diff = c.nodes ? best : 0.0;
    rep.caps[k] = c;
  });

  for (std::size_t k = 0; k < rep.caps.size(); ++k) {
    if (rep.caps[k].min_diff < -(tol + rep.caps[k].interpolation_bound)) break;
    rep.monotone_up_to = rep.caps[k].lambda;
  }

  // Slopes over the buffered window.
  std::vector<double> dn(g.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    if (!buffered[eq]) continue;
    dn[eq] = dn_at(u, eq);
    rep.slopes.push_back({g.coord(g.lattice_of(eq)), dn[eq]});
    rep.dn_u_min = std::min(rep.dn_u_min, dn[eq]);
  }
  const int last = dim - 1;
  // Walk up each column from a node with |dn_u| > tol across flat nodes to
  // the next non-flat one.
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    if (!buffered[eq] || std::abs(dn[eq]) <= tol) continue;
    std::size_t cur = g.lattice_of(eq);
    for (;;) {
      const auto up = g.neighbor(cur, last, 1);
      if (!up) break;
      const long up_eq = g.equation(*up);
      if (up_eq < 0 || !buffered[up_eq]) break;
      cur = *up;
      const double b = dn[up_eq];
      if (std::abs(b) <= tol) continue;
      if ((b > 0) != (dn[eq] > 0)) rep.sign_change_cells.push_back(g.coord(g.lattice_of(eq)));
      break;
    }
  }
  double highest_nonflat = -std::numeric_limits<double>::infinity();
  for (const auto& s : rep.slopes)
    if (std::abs(s.dn_u) > tol) highest_nonflat = std::max(highest_nonflat, s.x[last]);
  if (!rep.slopes.empty()) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& s : rep.slopes) top = std::max(top, s.x[last]);
    if (highest_nonflat < top) rep.zero_slope_from = highest_nonflat;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Slope identity on the plane
// ---------------------------------------------------------------------------

struct HopfSample {
  Coord x{};
  double lhs = 0.0;   // one-sided d/dx_N of (u_lambda - u) from below
  double rhs = 0.0;   // -2 times the centred d/dx_N of u
  double dn_u = 0.0;
};

struct HopfReport {
  double lambda = 0.0;
  std::vector<HopfSample> samples;
  double max_defect = 0.0;
  double min_dn_u = std::numeric_limits<double>::infinity();
  bool slope_positive = false;  // dn_u > tol at every sample
};

/// Checks d/dx_N (u_lambda - u) = -2 d/dx_N u on {x_N = lambda}, with the
/// left side from the second-order one-sided difference of w = u_lambda - u
/// at heights lambda, lambda - h, lambda - 2h and the right side from the
/// centred difference of u.
inline HopfReport hopf_slope_check(const SolutionField& u, double lambda, double tol = 1e-8) {
  const DomainGrid& g = *u.grid;
  const int last = g.dim() - 1;
  const double lo = g.box().lo[last], h = g.h();
  const double s = (lambda - lo) / h;
  require(std::abs(s - std::round(s)) <= 1e-9, "hopf: lambda must lie on a grid plane");
  const int k = static_cast<int>(std::round(s));
  require(k >= 2 && k + 2 <= g.counts()[last] - 1, "hopf: plane needs two grid planes on either side");

  HopfReport rep;
  rep.lambda = lambda;
  rep.slope_positive = true;
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    const std::size_t id = g.lattice_of(eq);
    auto idx = g.multi_index(id);
    if (idx[last] != k) continue;
    auto at = [&](int off) {
      auto j = idx;
      j[last] = k + off;
      return u.at_lattice(g.lattice_id(j));
    };
    const double um2 = at(-2), um1 = at(-1), u0 = at(0), up1 = at(1), up2 = at(2);
    // w(lambda - j h) = u(lambda + j h) - u(lambda - j h)
    const double w0 = 0.0, w1 = up1 - um1, w2 = up2 - um2;
    HopfSample smp;
    smp.x = g.coord(id);
    smp.lhs = (3.0 * w0 - 4.0 * w1 + w2) / (2.0 * h);
    smp.dn_u = (up1 - um1) / (2.0 * h);
    smp.rhs = -2.0 * smp.dn_u;
    (void)u0;
    rep.max_defect = std::max(rep.max_defect, std::abs(smp.lhs - smp.rhs));
    rep.min_dn_u = std::min(rep.min_dn_u, smp.dn_u);
    rep.slope_positive = rep.slope_positive && smp.dn_u > tol;
    rep.samples.push_back(smp);
  }
  require(!rep.samples.empty(), "hopf: no interior nodes on the plane");
  return rep;
}

}  // namespace epilab::moving_plane
