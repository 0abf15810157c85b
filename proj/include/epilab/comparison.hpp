// Comparison, threshold, uniqueness and symmetry experiments, and the
// exponentially growing harmonic family on the width-pi strip.
#pragma once

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "epilab/core.hpp"
#include "epilab/geometry.hpp"
#include "epilab/nonlinearity.hpp"
#include "epilab/profiles.hpp"
#include "epilab/solver.hpp"

namespace epilab::comparison {

using discretization::Box;
using discretization::DomainGrid;
using nonlinearity::Nonlinearity;
using solver::Problem;
using solver::SolutionField;

using GridPtr = std::shared_ptr<const DomainGrid>;

struct Witness {
  Coord x{};
  double gap = 0.0;  // v - u at x
};

struct ScanRow {
  double width = 0.0;
  double h = 0.0;
  double lambda1 = 0.0;
  bool unstable = false;         // lambda1 <= L
  bool below_epsilon = false;    // width < epsilon_paper
  int pairs_tested = 0;
  int pairs_held = 0;
};

struct RestartRow {
  int index = 0;
  double init_amplitude = 0.0;
  double sup_norm = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string method;
  std::string error;  // empty when the solve converged
};

struct ComparisonReport {
  std::string domain;
  double S = 0.0;
  ExtReal L{0.0};
  ExtReal epsilon_paper = ExtReal::infinity();
  std::optional<double> lambda1;
  bool comparison_holds = true;
  std::optional<double> failure_width;   // first scanned width with lambda1 <= L
  std::optional<double> crossing_width;  // bisected lambda1 = L crossing
  std::optional<Witness> witness;
  double min_gap = std::numeric_limits<double>::infinity();  // min of v - u
  double inequality_defect = 0.0;        // max of (Lu - Lv)^+ with L w = -Delta_h w - f(w)
  double symmetry_defect = 0.0;
  std::optional<double> exact_defect;
  std::vector<ScanRow> scan;
  std::vector<RestartRow> restarts;
  std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Pointwise comparison
// ---------------------------------------------------------------------------

/// Checks u <= v + tol at interior nodes. The boundary ordering u <= v is
/// checked first at every stencil arm end that reaches the boundary.
inline ComparisonReport comparison_test(const SolutionField& u, const SolutionField& v, const Nonlinearity& f,
                                        double tol = 1e-10) {
  require(u.grid && u.grid == v.grid, "comparison: u and v must share a grid");
  require(tol >= 0.0, "comparison: tol must be >= 0");
  const DomainGrid& g = *u.grid;
  const int dim = g.dim();
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    const std::size_t id = g.lattice_of(eq);
    for (int a = 0; a < dim; ++a)
      for (int side = 0; side < 2; ++side) {
        const auto nb = g.neighbor(id, a, side);
        if (g.theta(eq, a, side) == 1.0 && nb && g.equation(*nb) >= 0) continue;
        const Coord p = g.arm_point(eq, a, side);
        const double ub = u.trace(p), vb = v.trace(p);
        if (ub > vb + tol)
          fail(ErrorKind::validation, "boundary ordering violated at " + ExtReal(p[0]).str() + "," +
                                          ExtReal(p[dim - 1]).str() + ": u - v = " + ExtReal(ub - vb).str());
      }
  }
  ComparisonReport rep;
  rep.domain = g.domain().describe();
  const auto lu = discretization::stencil_apply(g, u.values, u.trace);
  const auto lv = discretization::stencil_apply(g, v.values, v.trace);
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    const double gap = v.values[eq] - u.values[eq];
    if (gap < rep.min_gap) {
      rep.min_gap = gap;
      rep.witness = Witness{g.coord(g.lattice_of(eq)), gap};
    }
    const double d = (lu[eq] - f(u.values[eq])) - (lv[eq] - f(v.values[eq]));
    rep.inequality_defect = std::max(rep.inequality_defect, d);
  }
  rep.comparison_holds = rep.min_gap >= -tol;
  if (rep.comparison_holds) rep.witness.reset();
  return rep;
}

/// A nonnegative bump of height 1 and radius r around c (C^1, compact support).
inline double bump(const Coord& x, const Coord& c, double r, int dim) {
  double d2 = 0.0;
  for (int a = 0; a < dim; ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
  const double s = d2 / (r * r);
  return s < 1.0 ? (1.0 - s) * (1.0 - s) : 0.0;
}

/// Ordered pairs for f = linear(L) with zero data: v solves -Delta_h v = rho
/// for a random load rho, and u = v + w with (A - L) w = -psi, psi a random
/// nonnegative bump kept away from the boundary. Then the differential
/// inequality holds with equality up to -psi and u, v share the boundary.
inline std::pair<SolutionField, SolutionField> random_ordered_pair(const Problem& pb, double L, std::mt19937_64& rng) {
  const DomainGrid& g = *pb.grid;
  const int dim = g.dim();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> rho(g.size());
  const double amp = 2.0 * unit(rng) - 1.0;
  const double freq = 1.0 + 3.0 * unit(rng);
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    const Coord x = g.coord(g.lattice_of(eq));
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += x[a];
    rho[eq] = amp * std::cos(freq * s);
  }
  auto v = solver::solve_poisson(pb, rho);

  // Bump centre drawn among nodes at least two steps inside.
  std::vector<std::size_t> deep;
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    const std::size_t id = g.lattice_of(eq);
    bool ok = true;
    for (int a = 0; a < dim && ok; ++a)
      for (int side = 0; side < 2 && ok; ++side) {
        const auto n1 = g.neighbor(id, a, side);
        ok = n1 && g.equation(*n1) >= 0 && g.neighbor(*n1, a, side) && g.equation(*g.neighbor(*n1, a, side)) >= 0;
      }
    if (ok) deep.push_back(eq);
  }
  require(!deep.empty(), "comparison: domain too thin for interior bumps");
  const Coord c = g.coord(g.lattice_of(deep[static_cast<std::size_t>(unit(rng) * deep.size()) % deep.size()]));
  const double r = 2.0 * g.h() * (1.0 + 3.0 * unit(rng));
  const double height = 0.1 + unit(rng);
  std::vector<double> psi(g.size());
  for (std::size_t eq = 0; eq < g.size(); ++eq) psi[eq] = -height * bump(g.coord(g.lattice_of(eq)), c, r, dim);
  auto shifted = pb.op().shifted(std::vector<double>(g.size(), L));
  auto w = solver::solve_linear(shifted, psi).x;
  SolutionField u = v;
  for (std::size_t eq = 0; eq < g.size(); ++eq) u.values[eq] += w[eq];
  u.method = solver::Method::linear;
  return {std::move(u), std::move(v)};
}

// ---------------------------------------------------------------------------
// Threshold scan
// ---------------------------------------------------------------------------

struct ScanOptions {
  int cells_per_width = 128;  // h = S / cells_per_width
  int pairs = 20;             // random ordered pairs per width below epsilon_paper
  std::uint64_t seed = 1;
  double tol = 1e-10;
};

inline GridPtr interval_grid(double width, int cells) {
  require(width > 0.0, "scan: widths must be positive");
  require(cells >= 2, "scan: need at least two cells");
  const double h = width / cells;
  return std::make_shared<const DomainGrid>(discretization::build_grid(
      geometry::OpenSet::strip(0.0, width, 1), Box{1, {0, 0, 0}, {width, 0, 0}}, h));
}

inline double strip_lambda1(double width, int cells) {
  auto g = interval_grid(width, cells);
  return solver::principal_eigenpair(discretization::assemble_laplacian(*g).op).lambda1;
}

/// For f = linear(L): discrete lambda1 of each strip width, the first width
/// with lambda1 <= L, and random comparison pairs at every width below
/// pi / sqrt(2 L).
inline ComparisonReport threshold_scan(double L, const std::vector<double>& widths, const ScanOptions& opt = {}) {
  require(L > 0.0, "scan: L must be positive");
  require(!widths.empty(), "scan: widths must be nonempty");
  require(std::is_sorted(widths.begin(), widths.end()), "scan: widths must increase");
  require(widths.front() > 0.0, "scan: widths must be positive");
  require(opt.pairs >= 0, "scan: pairs must be >= 0");
  ComparisonReport rep;
  rep.domain = "strip(0,S) in x_N, 1-D cross-section";
  rep.L = ExtReal(L);
  rep.epsilon_paper = nonlinearity::epsilon_bounded(L);
  const auto f = nonlinearity::linear(L);
  rep.scan.resize(widths.size());
  parallel_for(widths.size(), [&](std::size_t i) {
    ScanRow row;
    row.width = widths[i];
    row.h = widths[i] / opt.cells_per_width;
    auto g = interval_grid(widths[i], opt.cells_per_width);
    auto pb = Problem::make(g);
    row.lambda1 = solver::principal_eigenpair(pb.op()).lambda1;
    row.unstable = row.lambda1 <= L;
    row.below_epsilon = ExtReal(widths[i]) <= rep.epsilon_paper;
    if (row.below_epsilon) {
      std::mt19937_64 rng(opt.seed + 7919 * i);
      for (int k = 0; k < opt.pairs; ++k) {
        auto [u, v] = random_ordered_pair(pb, L, rng);
        auto cr = comparison_test(u, v, f, opt.tol);
        ++row.pairs_tested;
        if (cr.comparison_holds) ++row.pairs_held;
      }
    }
    rep.scan[i] = row;
  });
  rep.comparison_holds = true;
  for (std::size_t i = 0; i < rep.scan.size(); ++i) {
    const auto& row = rep.scan[i];
    rep.comparison_holds = rep.comparison_holds && row.pairs_held == row.pairs_tested;
    if (!rep.failure_width && row.unstable) {
      rep.failure_width = row.width;
      rep.lambda1 = row.lambda1;
      // lambda1 decreases with S; bisect between the neighbouring widths.
      double lo = i > 0 ? rep.scan[i - 1].width : 0.5 * row.width, hi = row.width;
      if (strip_lambda1(lo, opt.cells_per_width) > L) {
        for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          (strip_lambda1(mid, opt.cells_per_width) <= L ? hi : lo) = mid;
        }
        rep.crossing_width = 0.5 * (lo + hi);
      }
    }
  }
  if (!rep.failure_width) rep.notes.push_back("no width in the scan reached lambda1 <= L");
  if (rep.failure_width && !(rep.epsilon_paper < ExtReal(*rep.failure_width)))
    rep.notes.push_back("sufficiency gap violated: epsilon_paper >= failure_width");
  return rep;
}

// ---------------------------------------------------------------------------
// Uniqueness
// ---------------------------------------------------------------------------

struct UniquenessOptions {
  int restarts = 20;
  std::uint64_t seed = 1;
  double amplitude = 1.0;  // initial data drawn in [-amplitude, amplitude]
  double tol = 1e-8;
  solver::SemilinearPolicy policy{};
};

/// Solves from random bounded initial data. Requires f(0) = 0 and the section
/// S below epsilon(f, M) with M the larger of amplitude and 1.
inline ComparisonReport uniqueness_test(const Problem& pb, double section, const Nonlinearity& f,
                                        const UniquenessOptions& opt = {}) {
  require(opt.restarts >= 1, "uniqueness: restarts must be >= 1");
  require(opt.amplitude > 0.0, "uniqueness: amplitude must be positive");
  require(opt.tol > 0.0, "uniqueness: tol must be positive");
  require(section > 0.0, "uniqueness: section must be positive");
  require(f.f0() == 0.0, "uniqueness: needs f(0) = 0");
  ComparisonReport rep;
  rep.domain = pb.grid->domain().describe();
  rep.S = section;
  const double M = std::max(1.0, opt.amplitude);
  rep.L = nonlinearity::lipschitz_on(f, -M, M);
  rep.epsilon_paper = rep.L.is_finite() ? nonlinearity::epsilon_bounded(rep.L.value()) : ExtReal(0.0);
  rep.notes.push_back("L computed on [-" + ExtReal(M).str() + ", " + ExtReal(M).str() + "]");
  if (!(ExtReal(section) < rep.epsilon_paper))
    fail(ErrorKind::domain, "hypothesis violated: S >= threshold (S = " + ExtReal(section).str() +
                                ", epsilon = " + rep.epsilon_paper.str() + ")");
  const std::size_t n = pb.grid->size();
  rep.restarts.resize(static_cast<std::size_t>(opt.restarts));
  parallel_for(rep.restarts.size(), [&](std::size_t k) {
    RestartRow row;
    row.index = static_cast<int>(k);
    std::mt19937_64 rng(opt.seed + 104729 * k);
    std::uniform_real_distribution<double> d(-opt.amplitude, opt.amplitude);
    std::vector<double> init(n);
    for (double& x : init) x = d(rng);
    row.init_amplitude = max_abs(init);
    try {
      auto s = solver::solve_semilinear(pb, f, init, opt.policy);
      row.sup_norm = max_abs(s.values);
      row.residual = s.residual_norm;
      row.iterations = s.iterations;
      row.method = solver::to_string(s.method);
    } catch (const LabError& e) {
      row.error = e.what();
    }
    rep.restarts[k] = row;
  });
  rep.min_gap = 0.0;
  for (const auto& r : rep.restarts) {
    if (!r.error.empty()) {
      rep.comparison_holds = false;
      rep.notes.push_back("restart " + std::to_string(r.index) + ": " + r.error);
    } else if (!(r.sup_norm <= opt.tol)) {
      rep.comparison_holds = false;
      rep.min_gap = std::min(rep.min_gap, -r.sup_norm);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Symmetry
// ---------------------------------------------------------------------------

/// Reflection x_axis -> 2 c - x_axis or translation x_axis -> x_axis + shift.
struct Isometry {
  enum class Kind { identity, reflection, translation } kind = Kind::identity;
  int axis = 0;
  double at = 0.0;  // reflection plane or translation shift
  double buffer = 0.0;  // compared nodes (and images) keep this distance from artificial faces

  static Isometry identity() { return {}; }
  static Isometry reflection(int axis, double c, double buffer = 0.0) {
    return {Kind::reflection, axis, c, buffer};
  }
  static Isometry translation(int axis, double shift, double buffer = 0.0) {
    return {Kind::translation, axis, shift, buffer};
  }
  std::string describe() const {
    switch (kind) {
      case Kind::identity: return "identity";
      case Kind::reflection: return "reflection x" + std::to_string(axis + 1) + " about " + ExtReal(at).str();
      case Kind::translation: return "translation x" + std::to_string(axis + 1) + " by " + ExtReal(at).str();
    }
    return "";
  }
};

/// Lattice image of every lattice node under rho, or nullopt per node whose
/// image leaves the box. Throws unless rho maps nodes onto nodes.
inline std::vector<std::optional<std::size_t>> grid_map(const DomainGrid& g, const Isometry& rho) {
  require(rho.axis >= 0 && rho.axis < g.dim(), "isometry: axis out of range");
  const int a = rho.axis;
  const double h = g.h(), lo = g.box().lo[a];
  long k = 0;
  if (rho.kind != Isometry::Kind::identity) {
    const double s = rho.kind == Isometry::Kind::reflection ? (2.0 * rho.at - 2.0 * lo) / h : rho.at / h;
    if (std::abs(s - std::round(s)) > 1e-9) fail(ErrorKind::geometry, "isometry not grid-aligned: " + rho.describe());
    k = std::lround(s);
  }
  std::vector<std::optional<std::size_t>> img(g.lattice_size());
  for (std::size_t id = 0; id < g.lattice_size(); ++id) {
    auto idx = g.multi_index(id);
    long j = idx[a];
    if (rho.kind == Isometry::Kind::reflection) j = k - j;
    else if (rho.kind == Isometry::Kind::translation) j = j + k;
    if (j < 0 || j >= g.counts()[a]) continue;
    idx[a] = static_cast<int>(j);
    img[id] = g.lattice_id(idx);
  }
  return img;
}

/// max |u - u o rho| over interior nodes whose image is also an interior node
/// and both keep rho.buffer from the artificial faces.
inline double symmetry_defect(const SolutionField& u, const Isometry& rho) {
  const DomainGrid& g = *u.grid;
  const auto img = grid_map(g, rho);
  const int steps = static_cast<int>(std::ceil(rho.buffer / g.h() - 1e-9));
  double d = 0.0;
  std::size_t compared = 0;
  for (std::size_t eq = 0; eq < g.size(); ++eq) {
    const std::size_t id = g.lattice_of(eq);
    if (!img[id] || g.steps_to_artificial_face(id) < steps || g.steps_to_artificial_face(*img[id]) < steps) continue;
    const long j = g.equation(*img[id]);
    if (j < 0) continue;
    d = std::max(d, std::abs(u.values[eq] - u.values[static_cast<std::size_t>(j)]));
    ++compared;
  }
  require(compared > 0, "symmetry: no node pairs inside the buffer");
  return d;
}

/// Solves the problem (linear when f is constant) and measures the defect of
/// each isometry. exact, when given, is compared in max norm at all nodes.
inline ComparisonReport symmetry_test(const Problem& pb, const Nonlinearity& f, const std::vector<Isometry>& isometries,
                                      double tol, const std::function<double(const Coord&)>& exact = nullptr,
                                      const solver::SemilinearPolicy& policy = {}) {
  require(tol >= 0.0, "symmetry: tol must be >= 0");
  for (const auto& rho : isometries) grid_map(*pb.grid, rho);  // alignment before any compute
  ComparisonReport rep;
  rep.domain = pb.grid->domain().describe();
  SolutionField u;
  if (std::holds_alternative<nonlinearity::Constant>(f.kind())) {
    u = solver::solve_poisson(pb, std::vector<double>(pb.grid->size(), f.f0()));
  } else {
    u = solver::solve_semilinear(pb, f, std::nullopt, policy);
  }
  for (const auto& rho : isometries) {
    const double d = symmetry_defect(u, rho);
    rep.notes.push_back(rho.describe() + ": defect " + ExtReal(d).str());
    rep.symmetry_defect = std::max(rep.symmetry_defect, d);
  }
  if (exact) {
    const auto ex = discretization::sample(*pb.grid, exact);
    double e = 0.0;
    for (std::size_t i = 0; i < ex.size(); ++i) e = std::max(e, std::abs(ex[i] - u.values[i]));
    rep.exact_defect = e;
  }
  rep.comparison_holds = rep.symmetry_defect <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Growth counterexample
// ---------------------------------------------------------------------------

struct GrowthReport {
  int m = 1;
  double h = 0.0;
  double x_max = 0.0;
  double max_residual = 0.0;   // max |Delta_h w| over interior nodes
  double residual_bound = 0.0; // m^4 h^2 cosh(m x_max) / 6
  double max_boundary_trace = 0.0;
  double max_interior = 0.0;
  double growth_slope = 0.0;   // least-squares slope of log max|w| over |x| <= X
  std::vector<std::pair<double, double>> growth_samples;  // (X, log max |w|)
};

/// w = cosh(m x_1) sin(m x_2) on the strip 0 < x_2 < pi, truncated to
/// |x_1| <= x_max with h = pi / cells.
inline GrowthReport growth_counterexample(int m, double x_max, int cells, std::vector<double> fit_windows = {}) {
  require(m >= 1, "growth: m must be >= 1");
  require(x_max > 0.0, "growth: x_max must be positive");
  require(cells >= 4, "growth: need at least four cells across the strip");
  GrowthReport rep;
  rep.m = m;
  rep.h = kPi / cells;
  const int nx = static_cast<int>(std::ceil(x_max / rep.h - 1e-9));
  rep.x_max = nx * rep.h;
  auto g = std::make_shared<const DomainGrid>(discretization::build_grid(
      geometry::OpenSet::strip(0.0, kPi), Box{2, {-rep.x_max, 0, 0}, {rep.x_max, kPi, 0}}, rep.h));
  const auto w = profiles::harmonic_growth(m);
  const auto vals = discretization::sample(*g, w);
  const auto lap = discretization::stencil_apply(*g, vals, w);
  rep.max_residual = max_abs(lap);
  rep.residual_bound = std::pow(m, 4) * rep.h * rep.h * std::cosh(m * rep.x_max) / 6.0;
  rep.max_interior = max_abs(vals);
  for (std::size_t id = 0; id < g->lattice_size(); ++id) {
    const auto idx = g->multi_index(id);
    if (idx[1] == 0 || idx[1] == g->counts()[1] - 1)
      rep.max_boundary_trace = std::max(rep.max_boundary_trace, std::abs(w(g->coord(id))));
  }
  if (fit_windows.empty())
    for (double X = 2.0; X <= std::min(6.0, rep.x_max) + 1e-12; X += 0.5) fit_windows.push_back(X);
  require(fit_windows.size() >= 2, "growth: need two fit windows");
  for (double X : fit_windows) {
    double mx = 0.0;
    for (std::size_t eq = 0; eq < g->size(); ++eq)
      if (std::abs(g->coord(g->lattice_of(eq))[0]) <= X + 1e-12) mx = std::max(mx, std::abs(vals[eq]));
    rep.growth_samples.emplace_back(X, std::log(mx));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rep.growth_samples.size());
  for (auto [x, y] : rep.growth_samples) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.growth_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

}  // namespace epilab::comparison
