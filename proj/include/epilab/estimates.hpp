// Interior gradient bound and boundary oscillation decay, probed on grid
// functions.
#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "epilab/core.hpp"
#include "epilab/solver.hpp"

namespace epilab::estimates {

using discretization::DomainGrid;
using solver::SolutionField;

/// Slack allowance C h^2 for the centred difference in the gradient bound.
/// Calibrated once on the catalog solutions (worst observed ratio below 0.2)
/// and frozen.
inline constexpr double kBrandtSchemeConstant = 1.0;

struct BrandtReport {
  Coord y{};
  double delta = 0.0;
  double lhs = 0.0;        // max_i |centred d_i u(y)|
  double sup_u = 0.0;      // max |u| over the ball
  double sup_f = 0.0;      // max |f| over the ball
  double rhs = 0.0;        // (2N / delta) sup_u + (delta / 4) sup_f
  double slack = 0.0;      // rhs - lhs
  double allowance = 0.0;  // C h^2
  bool holds = false;
  std::size_t nodes = 0;
};

/// Lattice nodes within distance r of x (closed ball), as lattice ids.
inline std::vector<std::size_t> ball_nodes(const DomainGrid& g, const Coord& x, double r) {
  const int dim = g.dim();
  std::array<int, kMaxDim> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((x[a] - r - g.box().lo[a]) / g.h())) - 1);
    hi[a] = std::min(g.counts()[a] - 1, static_cast<int>(std::ceil((x[a] + r - g.box().lo[a]) / g.h())) + 1);
  }
  std::vector<std::size_t> out;
  std::array<int, kMaxDim> idx = lo;
  for (;;) {
    const std::size_t id = g.lattice_id(idx);
    const Coord c = g.coord(id);
    double d2 = 0.0;
    for (int a = 0; a < dim; ++a) d2 += (c[a] - x[a]) * (c[a] - x[a]);
    if (d2 <= r * r * (1.0 + 1e-12)) out.push_back(id);
    int a = dim - 1;
    while (a >= 0 && idx[a] == hi[a]) {
      idx[a] = lo[a];
      --a;
    }
    if (a < 0) break;
    ++idx[a];
  }
  return out;
}

/// Compares |d_i u(y)| with (2N/delta) sup|u| + (delta/4) sup|f| over the
/// closed ball B(y, delta). f_values holds f at every interior node
/// (typically f(u) or -Delta u). The ball must lie in the box and every
/// lattice node in it must be interior with no arm reaching the boundary
/// inside the ball.
inline BrandtReport brandt_check(const SolutionField& u, std::span<const double> f_values, const Coord& y,
                                 double delta) {
  const DomainGrid& g = *u.grid;
  const int dim = g.dim();
  require(delta > 0.0, "brandt: delta must be positive");
  require(f_values.size() == g.size(), "brandt: f_values must have one entry per interior node");
  const auto yid = g.locate(y);
  require(yid.has_value() && g.equation(*yid) >= 0, "brandt: y must be an interior node");
  for (int a = 0; a < dim; ++a)
    if (y[a] - delta <= g.box().lo[a] || y[a] + delta >= g.box().hi[a])
      fail(ErrorKind::geometry, "ball exits domain: box face along axis " + std::to_string(a));
  BrandtReport rep;
  rep.y = y;
  rep.delta = delta;
  for (std::size_t id : ball_nodes(g, y, delta)) {
    const long eq = g.equation(id);
    if (eq < 0) fail(ErrorKind::geometry, "ball exits domain: non-interior node inside the ball");
    for (int a = 0; a < dim; ++a)
      for (int side = 0; side < 2; ++side) {
        if (g.theta(eq, a, side) == 1.0) continue;
        const Coord p = g.arm_point(eq, a, side);
        double d2 = 0.0;
        for (int k = 0; k < dim; ++k) d2 += (p[k] - y[k]) * (p[k] - y[k]);
        if (d2 <= delta * delta) fail(ErrorKind::geometry, "ball exits domain: boundary crossing inside the ball");
      }
    rep.sup_u = std::max(rep.sup_u, std::abs(u.values[eq]));
    rep.sup_f = std::max(rep.sup_f, std::abs(f_values[eq]));
    ++rep.nodes;
  }
  for (int a = 0; a < dim; ++a) {
    const double up = u.at_lattice(*g.neighbor(*yid, a, 1));
    const double dn = u.at_lattice(*g.neighbor(*yid, a, 0));
    rep.lhs = std::max(rep.lhs, std::abs(up - dn) / (2.0 * g.h()));
  }
  rep.rhs = 2.0 * dim / delta * rep.sup_u + 0.25 * delta * rep.sup_f;
  rep.slack = rep.rhs - rep.lhs;
  rep.allowance = kBrandtSchemeConstant * g.h() * g.h();
  rep.holds = rep.slack >= -rep.allowance;
  return rep;
}

inline std::vector<double> f_of_u(const SolutionField& u, const nonlinearity::Nonlinearity& f) {
  std::vector<double> out(u.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(u.values[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Oscillation decay
// ---------------------------------------------------------------------------

struct OscillationFit {
  Coord center{};
  std::vector<double> radii;       // decreasing, after discarding
  std::vector<double> osc_values;
  std::vector<std::size_t> counts; // nodes per ball
  double alpha_fit = 0.0;
  double C_fit = 0.0;
  bool discarded_largest = false;
};

inline constexpr std::size_t kMinBallNodes = 5;

/// osc of u over the closure nodes of Omega in B(x0, r): interior nodes plus
/// x0 itself, which carries the trace. alpha_fit and C_fit come from least
/// squares on log osc = log C + alpha log r.
inline OscillationFit oscillation_fit(const SolutionField& u, const Coord& x0, std::vector<double> radii) {
  const DomainGrid& g = *u.grid;
  require(radii.size() >= 2, "oscillation: need at least two radii");
  for (double r : radii) require(r > 0.0, "oscillation: radii must be positive");
  std::sort(radii.begin(), radii.end(), std::greater<>());
  const auto xid = g.locate(x0);
  require(xid.has_value(), "oscillation: x0 must be a lattice node");
  require(g.equation(*xid) < 0, "oscillation: x0 must lie on the discrete boundary");
  bool adjacent = false;
  for (std::size_t id : ball_nodes(g, x0, std::sqrt(static_cast<double>(g.dim())) * g.h()))
    adjacent = adjacent || g.equation(id) >= 0;
  require(adjacent, "oscillation: x0 must be within one cell of an interior node");

  OscillationFit fit;
  fit.center = x0;
  const double trace0 = u.trace(g.coord(*xid));
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    double mx = trace0, mn = trace0;
    std::size_t count = 0;
    bool touches = false;
    for (std::size_t id : ball_nodes(g, x0, r)) {
      const long eq = g.equation(id);
      if (eq < 0) continue;
      if (g.steps_to_artificial_face(id) < 3) touches = true;
      mx = std::max(mx, u.values[eq]);
      mn = std::min(mn, u.values[eq]);
      ++count;
    }
    if (k == 0 && touches) {
      fit.discarded_largest = true;
      continue;
    }
    fit.radii.push_back(r);
    fit.osc_values.push_back(mx - mn);
    fit.counts.push_back(count);
  }
  require(fit.radii.size() >= 2, "oscillation: fewer than two radii left after discarding");
  if (fit.counts.back() < kMinBallNodes)
    fail(ErrorKind::validation, "too few nodes in smallest ball (" + std::to_string(fit.counts.back()) + ")");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(fit.radii.size());
  for (std::size_t k = 0; k < fit.radii.size(); ++k) {
    require(fit.osc_values[k] > 0.0, "oscillation: zero oscillation, exponent undefined");
    const double x = std::log(fit.radii[k]), yv = std::log(fit.osc_values[k]);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  fit.alpha_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.C_fit = std::exp((sy - fit.alpha_fit * sx) / n);
  return fit;
}

/// |alpha_coarse - alpha_fine| / alpha_fine.
inline double refinement_change(const OscillationFit& coarse, const OscillationFit& fine) {
  return std::abs(coarse.alpha_fit - fine.alpha_fit) / std::abs(fine.alpha_fit);
}

// ---------------------------------------------------------------------------
// Probe setups
// ---------------------------------------------------------------------------

struct BoundaryProbe {
  std::string name;
  geometry::OpenSet domain;
  discretization::Box box;
  Coord x0{};
  std::vector<double> radii;
};

/// Torsion problems around three boundary points: the orthant corner, the
/// slope jump of g2 at x = 6 and the vertical tangent of g1 at x = -4.
inline std::vector<BoundaryProbe> boundary_probes() {
  const std::vector<double> radii{1.0, 0.75, 0.5, 0.375, 0.25};
  return {
      {"orthant_corner", geometry::OpenSet::orthant(), {2, {0, 0, 0}, {3, 3, 0}}, {0, 0, 0}, radii},
      {"g2_slope_jump", geometry::OpenSet::epigraph(geometry::make_g2()), {2, {3, 1, 0}, {9, 7, 0}}, {6, 2, 0}, radii},
      {"g1_vertical_tangent", geometry::OpenSet::epigraph(geometry::make_g1()), {2, {-7, -1, 0}, {-1, 5, 0}},
       {-4, 0, 0}, radii},
  };
}

/// Solves -Delta u = 1 with zero data on the probe's box at spacing h and fits
/// the oscillation exponent at x0.
inline OscillationFit probe_fit(const BoundaryProbe& p, double h) {
  auto g = std::make_shared<const DomainGrid>(discretization::build_grid(p.domain, p.box, h));
  auto pb = solver::Problem::make(g);
  auto u = solver::solve_poisson(pb, std::vector<double>(g->size(), 1.0));
  return oscillation_fit(u, p.x0, p.radii);
}

}  // namespace epilab::estimates
