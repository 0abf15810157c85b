// Epigraph and strip-type domains, caps, reflections and directional
// section measures of open sets.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "epilab/core.hpp"

namespace epilab::geometry {

// ---------------------------------------------------------------------------
// Epigraph catalog
// ---------------------------------------------------------------------------

struct HalfSpace {};
/// Two circular arcs joining the levels 0 and 2 (globally 1/2-Hölder).
struct LipschitzG1 {};
/// LipschitzG1 plus the ramp (x - 6)^+.
struct LipschitzG2 {};
/// Truncated Weierstrass series sum_{n>=1} b^{-n alpha} cos(b^n pi x).
struct Weierstrass {
  int b = 2;
  double alpha = 0.5;
  double tol = 1e-12;
  int terms = 0;  // number of summed terms, fixed by the tail bound
};
/// g(x') = |x'|^2.
struct CoerciveQuadratic {};
/// g(x') = exp(x'_1); inf g = 0 is not attained.
struct ExpX1 {};
/// Piecewise-(multi)linear interpolation of a tensor lattice of g values.
/// Values outside the lattice are clamped to the nearest lattice face.
struct SampledG {
  std::vector<std::vector<double>> axes;  // one sorted coordinate list per x' axis
  std::vector<double> values;             // row-major, last axis fastest
};

using EpigraphKind =
    std::variant<HalfSpace, LipschitzG1, LipschitzG2, Weierstrass, CoerciveQuadratic, ExpX1, SampledG>;

struct EpigraphSpec {
  int dimension = 2;  // N; g acts on R^{N-1}
  EpigraphKind kind = HalfSpace{};
  double shift = 0.0;  // added to g so that inf g = 0

  std::string tag() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, HalfSpace>) return "half_space";
          else if constexpr (std::is_same_v<K, LipschitzG1>) return "lipschitz_g1";
          else if constexpr (std::is_same_v<K, LipschitzG2>) return "lipschitz_g2";
          else if constexpr (std::is_same_v<K, Weierstrass>) return "weierstrass";
          else if constexpr (std::is_same_v<K, CoerciveQuadratic>) return "coercive_quadratic";
          else if constexpr (std::is_same_v<K, ExpX1>) return "exp_x1";
          else return "custom_sampled";
        },
        kind);
  }
};

inline std::vector<std::string> epigraph_catalog() {
  return {"half_space", "lipschitz_g1", "lipschitz_g2", "weierstrass",
          "coercive_quadratic", "exp_x1", "custom_sampled"};
}

namespace detail {

inline double g1(double x) {
  if (x <= -4.0) return 0.0;
  if (x <= 0.0) return std::sqrt(std::max(0.0, 4.0 - (x + 2.0) * (x + 2.0)));
  if (x <= 2.0) return std::sqrt(std::max(0.0, 4.0 - (x - 2.0) * (x - 2.0)));
  return 2.0;
}

/// Phase of b^n |x| modulo 2, computed exactly in integer arithmetic when the
/// binary expansion of x fits, so large n does not amplify rounding.
class WeierstrassPhase {
 public:
  WeierstrassPhase(double x, int b) : b_(b) {
    x = std::abs(x);
    if (x == 0.0) {
      zero_ = true;
      return;
    }
    int e = 0;
    double m = std::frexp(x, &e);
    auto mant = static_cast<unsigned __int128>(std::ldexp(m, 53));
    exponent_ = e - 53;
    if (exponent_ >= 1) {
      zero_ = true;  // x is an even integer multiple; every phase is 0
      return;
    }
    bits_ = 1 - exponent_;
    if (bits_ <= 127) {
      exact_ = true;
      mask_ = (static_cast<unsigned __int128>(1) << bits_) - 1;
      residue_ = mant & mask_;
    } else {
      approx_ = std::fmod(x, 2.0);
    }
  }

  /// Advances to the next n and returns b^n |x| mod 2 in [0, 2).
  double next() {
    if (zero_) return 0.0;
    if (exact_) {
      residue_ = (residue_ * static_cast<unsigned __int128>(b_)) & mask_;
      return std::ldexp(static_cast<double>(residue_), exponent_);
    }
    approx_ = std::fmod(approx_ * b_, 2.0);
    return approx_;
  }

 private:
  int b_;
  bool zero_ = false;
  bool exact_ = false;
  int exponent_ = 0;
  int bits_ = 0;
  unsigned __int128 mask_ = 0;
  unsigned __int128 residue_ = 0;
  double approx_ = 0.0;
};

inline double interp_sampled(const SampledG& s, std::span<const double> xp) {
  const std::size_t d = s.axes.size();
  // Locate the cell and weights along each axis.
  std::vector<std::size_t> base(d);
  std::vector<double> w(d);
  for (std::size_t a = 0; a < d; ++a) {
    const auto& ax = s.axes[a];
    double x = std::clamp(xp[a], ax.front(), ax.back());
    if (ax.size() == 1) {
      base[a] = 0;
      w[a] = 0.0;
      continue;
    }
    auto it = std::upper_bound(ax.begin(), ax.end(), x);
    std::size_t i = static_cast<std::size_t>(std::distance(ax.begin(), it));
    i = std::clamp<std::size_t>(i, 1, ax.size() - 1) - 1;
    base[a] = i;
    w[a] = (x - ax[i]) / (ax[i + 1] - ax[i]);
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const bool up = (corner >> a) & 1u;
      // Single-point axes have w = 0, so their "up" corner carries no weight.
      const std::size_t idx = std::min(base[a] + (up ? 1 : 0), s.axes[a].size() - 1);
      weight *= up ? w[a] : 1.0 - w[a];
      flat = flat * s.axes[a].size() + idx;
    }
    if (weight != 0.0) acc += weight * s.values[flat];
  }
  return acc;
}

}  // namespace detail

/// Number of Weierstrass terms: the series is cut at the first n whose tail
/// b^{-n alpha} / (1 - b^{-alpha}) is at most tol; terms 1..n-1 are summed.
inline int weierstrass_terms(int b, double alpha, double tol) {
  const double q = std::pow(static_cast<double>(b), -alpha);
  int n = 1;
  while (std::pow(q, n) / (1.0 - q) > tol) ++n;
  return n - 1;
}

inline double weierstrass_sum(const Weierstrass& w, double x) {
  detail::WeierstrassPhase phase(x, w.b);
  const double q = std::pow(static_cast<double>(w.b), -w.alpha);
  double weight = 1.0;
  double sum = 0.0;
  for (int n = 1; n <= w.terms; ++n) {
    weight *= q;
    sum += weight * std::cos(kPi * phase.next());
  }
  return sum;
}

/// g(x'), including the normalization shift.
inline double eval_g(const EpigraphSpec& spec, std::span<const double> xp) {
  const double raw = std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HalfSpace>) {
          return 0.0;
        } else if constexpr (std::is_same_v<K, LipschitzG1>) {
          return detail::g1(xp[0]);
        } else if constexpr (std::is_same_v<K, LipschitzG2>) {
          return detail::g1(xp[0]) + std::max(0.0, xp[0] - 6.0);
        } else if constexpr (std::is_same_v<K, Weierstrass>) {
          return weierstrass_sum(k, xp[0]);
        } else if constexpr (std::is_same_v<K, CoerciveQuadratic>) {
          double s = 0.0;
          for (double v : xp) s += v * v;
          return s;
        } else if constexpr (std::is_same_v<K, ExpX1>) {
          return std::exp(xp[0]);
        } else {
          return detail::interp_sampled(k, xp);
        }
      },
      spec.kind);
  return raw + spec.shift;
}

inline double eval_g(const EpigraphSpec& spec, double x1) {
  const double xp[1] = {x1};
  return eval_g(spec, std::span<const double>(xp, 1));
}

/// Shift so that the minimum of g over the given x' lattice is exactly 0.
inline EpigraphSpec normalized(EpigraphSpec spec, const std::vector<std::vector<double>>& lattice) {
  require(!lattice.empty(), "normalization lattice is empty");
  spec.shift = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& p : lattice) lo = std::min(lo, eval_g(spec, p));
  spec.shift = -lo;
  return spec;
}

inline EpigraphSpec make_half_space(int n = 2) { return {n, HalfSpace{}, 0.0}; }
inline EpigraphSpec make_g1(int n = 2) { return {n, LipschitzG1{}, 0.0}; }
inline EpigraphSpec make_g2(int n = 2) { return {n, LipschitzG2{}, 0.0}; }
inline EpigraphSpec make_coercive_quadratic(int n = 2) { return {n, CoerciveQuadratic{}, 0.0}; }
inline EpigraphSpec make_exp_x1(int n = 2) { return {n, ExpX1{}, 0.0}; }

/// Raw (unshifted) truncated Weierstrass epigraph.
inline EpigraphSpec make_weierstrass_raw(int b, double alpha, double tol, int n = 2) {
  require(b > 1, "weierstrass: b must be an integer > 1");
  require(alpha > 0.0 && alpha < 1.0, "weierstrass: alpha must lie in (0,1)");
  require(tol > 0.0, "weierstrass: tol must be positive");
  return {n, Weierstrass{b, alpha, tol, weierstrass_terms(b, alpha, tol)}, 0.0};
}

/// Weierstrass epigraph normalized on `samples` points of one period [0, 2).
inline EpigraphSpec make_weierstrass(int b, double alpha, double tol, int n = 2,
                                     std::size_t samples = 10000) {
  auto spec = make_weierstrass_raw(b, alpha, tol, n);
  std::vector<std::vector<double>> lattice(samples);
  for (std::size_t i = 0; i < samples; ++i) lattice[i] = {2.0 * static_cast<double>(i) / samples};
  return normalized(spec, lattice);
}

inline EpigraphSpec make_sampled(int n, SampledG g) {
  require(static_cast<int>(g.axes.size()) == n - 1, "custom_sampled: need one axis per x' coordinate");
  std::size_t count = 1;
  for (const auto& ax : g.axes) {
    require(!ax.empty(), "custom_sampled: empty axis");
    require(std::is_sorted(ax.begin(), ax.end()) &&
                std::adjacent_find(ax.begin(), ax.end()) == ax.end(),
            "custom_sampled: axis must be strictly increasing");
    count *= ax.size();
  }
  require(g.values.size() == count, "custom_sampled: value count does not match lattice");
  for (double v : g.values) require(std::isfinite(v), "custom_sampled: non-finite g value");
  return {n, std::move(g), 0.0};
}

/// Metadata from the source construction, recorded but not verified.
inline double exterior_sphere_radius(const EpigraphSpec& spec) {
  if (std::holds_alternative<LipschitzG1>(spec.kind) || std::holds_alternative<LipschitzG2>(spec.kind))
    return 0.5;
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Caps and reflections
// ---------------------------------------------------------------------------

/// (x', 2 lambda - x_N).
inline Coord reflect(const Coord& x, int dim, double lambda) {
  Coord r = x;
  r[dim - 1] = 2.0 * lambda - x[dim - 1];
  return r;
}

/// g(x') < x_N < lambda.
inline bool cap_membership(const EpigraphSpec& spec, std::span<const double> x, double lambda) {
  const std::size_t n = x.size();
  const double xn = x[n - 1];
  return eval_g(spec, x.first(n - 1)) < xn && xn < lambda;
}

// ---------------------------------------------------------------------------
// General open sets
// ---------------------------------------------------------------------------

/// a < x_N < b.
struct Strip {
  double lo = 0.0, hi = 1.0;
};
/// Union of the band |x_2| < 1 and the two thin diagonal bands of
/// half-width sinh^{-1}(e^{-|x_1|}) around x_2 = +-|x_1|.
struct Omega1 {};
/// 0 < x_2 < x_1^2.
struct Omega3 {};
/// All coordinates positive.
struct Orthant {};
struct Ball {
  Coord center{};
  double radius = 1.0;
};
/// |(x_2, ..., x_N)| < phi(x_1).
struct Revolution {
  std::function<double(double)> phi;
  std::string label;
};
struct EpigraphSet {
  EpigraphSpec spec;
};

using Shape = std::variant<Strip, Omega1, Omega3, Orthant, Ball, Revolution, EpigraphSet>;

inline double omega1_halfwidth(double x) { return std::asinh(std::exp(-std::abs(x))); }

class OpenSet {
 public:
  OpenSet(int dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {
    require(dim >= 1 && dim <= kMaxDim, "open set dimension must be 1..3");
    if (std::holds_alternative<Omega1>(shape_) || std::holds_alternative<Omega3>(shape_))
      require(dim == 2, "omega1/omega3 are planar sets");
    if (auto* e = std::get_if<EpigraphSet>(&shape_))
      require(e->spec.dimension == dim, "epigraph dimension mismatch");
  }

  static OpenSet strip(double lo, double hi, int dim = 2) {
    require(lo < hi, "strip: need lo < hi");
    return {dim, Strip{lo, hi}};
  }
  static OpenSet epigraph(EpigraphSpec spec) {
    const int n = spec.dimension;
    return {n, EpigraphSet{std::move(spec)}};
  }
  static OpenSet omega1() { return {2, Omega1{}}; }
  static OpenSet omega3() { return {2, Omega3{}}; }
  static OpenSet orthant(int dim = 2) { return {dim, Orthant{}}; }
  static OpenSet ball(Coord center, double radius, int dim = 2) {
    require(radius > 0.0, "ball: radius must be positive");
    return {dim, Ball{center, radius}};
  }
  static OpenSet revolution(std::function<double(double)> phi, std::string label, int dim = 2) {
    require(dim >= 2, "revolution domains need dim >= 2");
    return {dim, Revolution{std::move(phi), std::move(label)}};
  }
  /// phi(x_1) = mean + amplitude * cos(x_1).
  static OpenSet revolution_cosine(double mean, double amplitude, int dim = 2) {
    require(mean - std::abs(amplitude) > 0.0, "revolution: phi must stay positive");
    return revolution([=](double x) { return mean + amplitude * std::cos(x); },
                      "cosine(" + std::to_string(mean) + "," + std::to_string(amplitude) + ")", dim);
  }

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }

  bool contains(std::span<const double> x) const {
    return std::visit(
        [&](const auto& s) -> bool {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Strip>) {
            const double y = x[dim_ - 1];
            return s.lo < y && y < s.hi;
          } else if constexpr (std::is_same_v<S, Omega1>) {
            const double ax = std::abs(x[0]);
            const double y = x[1];
            const double hw = omega1_halfwidth(x[0]);
            return std::abs(y) < 1.0 || (ax - hw < y && y < ax + hw) || (-ax - hw < y && y < -ax + hw);
          } else if constexpr (std::is_same_v<S, Omega3>) {
            return 0.0 < x[1] && x[1] < x[0] * x[0];
          } else if constexpr (std::is_same_v<S, Orthant>) {
            for (int i = 0; i < dim_; ++i)
              if (!(x[i] > 0.0)) return false;
            return true;
          } else if constexpr (std::is_same_v<S, Ball>) {
            double r2 = 0.0;
            for (int i = 0; i < dim_; ++i) r2 += (x[i] - s.center[i]) * (x[i] - s.center[i]);
            return r2 < s.radius * s.radius;
          } else if constexpr (std::is_same_v<S, Revolution>) {
            double r2 = 0.0;
            for (int i = 1; i < dim_; ++i) r2 += x[i] * x[i];
            return std::sqrt(r2) < s.phi(x[0]);
          } else {
            return eval_g(s.spec, x.first(dim_ - 1)) < x[dim_ - 1];
          }
        },
        shape_);
  }

  bool contains(const Coord& c) const { return contains(view(c, dim_)); }

  std::string describe() const {
    return std::visit(
        [&](const auto& s) -> std::string {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Strip>)
            return "strip(" + ExtReal(s.lo).str() + "," + ExtReal(s.hi).str() + ")";
          else if constexpr (std::is_same_v<S, Omega1>) return "omega1";
          else if constexpr (std::is_same_v<S, Omega3>) return "omega3";
          else if constexpr (std::is_same_v<S, Orthant>) return "orthant";
          else if constexpr (std::is_same_v<S, Ball>) return "ball(r=" + ExtReal(s.radius).str() + ")";
          else if constexpr (std::is_same_v<S, Revolution>) return "revolution(" + s.label + ")";
          else return "epigraph(" + s.spec.tag() + ")";
        },
        shape_);
  }

  /// The epigraph behind this set, if it is one.
  const EpigraphSpec* epigraph_spec() const {
    if (auto* e = std::get_if<EpigraphSet>(&shape_)) return &e->spec;
    return nullptr;
  }

 private:
  int dim_;
  Shape shape_;
};

// ---------------------------------------------------------------------------
// Section measure
// ---------------------------------------------------------------------------

struct SectionOptions {
  double line_resolution = 0.01;
  double window = 100.0;  // probes cover t in [-window, window] along nu
};

struct Interval {
  double lo, hi;
};

struct LineSample {
  std::vector<double> x_prime;
  double measure = 0.0;
  bool touches_window = false;
  std::vector<Interval> intervals;  // in the line parameter t
};

struct SectionMeasure {
  double value = 0.0;
  std::vector<LineSample> per_line;
  std::vector<double> direction;
  bool unbounded_suspected = false;
};

namespace detail {

/// Orthonormal basis of nu^perp. For nu = e_N this is e_1..e_{N-1}.
inline std::vector<std::vector<double>> complement_basis(std::span<const double> nu) {
  const std::size_t n = nu.size();
  std::size_t skip = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(nu[i]) > std::abs(nu[skip])) skip = i;
  std::vector<std::vector<double>> basis;
  for (std::size_t i = 0; i < n && basis.size() + 1 < n; ++i) {
    if (i == skip) continue;
    std::vector<double> v(n, 0.0);
    v[i] = 1.0;
    auto project_out = [&](const std::vector<double>& u) {
      double d = 0.0;
      for (std::size_t k = 0; k < n; ++k) d += v[k] * u[k];
      for (std::size_t k = 0; k < n; ++k) v[k] -= d * u[k];
    };
    project_out(std::vector<double>(nu.begin(), nu.end()));
    for (const auto& b : basis) project_out(b);
    double norm = 0.0;
    for (double c : v) norm += c * c;
    norm = std::sqrt(norm);
    for (double& c : v) c /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace detail

/// Intersection of the line {base + t nu : |t| <= window} with the set, as a
/// union of disjoint intervals. Membership is sampled at line_resolution and
/// every sign change is refined by bisection.
inline LineSample probe_line(const OpenSet& set, const Coord& base, std::span<const double> nu,
                             const SectionOptions& opt) {
  const int dim = set.dim();
  auto at = [&](double t) {
    Coord p = base;
    for (int i = 0; i < dim; ++i) p[i] += t * nu[i];
    return set.contains(p);
  };
  const double T = opt.window;
  const auto steps = static_cast<std::size_t>(std::ceil(2.0 * T / opt.line_resolution));
  const double dt = 2.0 * T / static_cast<double>(steps);
  auto t_of = [&](std::size_t k) { return k == steps ? T : -T + static_cast<double>(k) * dt; };
  auto refine = [&](double a, double b, bool inside_a) {
    // Invariant: at(a) == inside_a, at(b) != inside_a.
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      if (at(m) == inside_a) a = m;
      else b = m;
    }
    return 0.5 * (a + b);
  };

  LineSample out;
  bool prev = at(-T);
  double start = -T;
  if (prev) out.touches_window = true;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = t_of(k);
    const bool cur = at(t);
    if (cur != prev) {
      const double cross = refine(t_of(k - 1), t, prev);
      if (cur) start = cross;
      else out.intervals.push_back({start, cross});
      prev = cur;
    }
  }
  if (prev) {
    out.intervals.push_back({start, T});
    out.touches_window = true;
  }
  for (const auto& iv : out.intervals) out.measure += iv.hi - iv.lo;
  return out;
}

/// sup over probe lines parallel to nu of the 1-D measure of the line's
/// intersection with the set.
inline SectionMeasure section_measure(const OpenSet& set, std::span<const double> nu,
                                      const std::vector<std::vector<double>>& probe,
                                      const SectionOptions& opt = {}) {
  require(opt.line_resolution > 0.0, "section: line_resolution must be positive");
  require(opt.window > 0.0, "section: window must be positive");
  require(!probe.empty(), "section: probe grid is empty");
  const int dim = set.dim();
  require(static_cast<int>(nu.size()) == dim, "section: direction has wrong dimension");
  double norm = 0.0;
  for (double c : nu) norm += c * c;
  require(std::abs(norm - 1.0) < 1e-12, "section: direction must be a unit vector");

  const auto basis = detail::complement_basis(nu);
  SectionMeasure result;
  result.direction.assign(nu.begin(), nu.end());
  result.per_line.resize(probe.size());
  parallel_for(probe.size(), [&](std::size_t i) {
    const auto& xp = probe[i];
    require(xp.size() == basis.size(), "section: probe point has wrong dimension");
    Coord base{};
    for (std::size_t b = 0; b < basis.size(); ++b)
      for (int k = 0; k < dim; ++k) base[k] += xp[b] * basis[b][k];
    auto sample = probe_line(set, base, nu, opt);
    sample.x_prime = xp;
    result.per_line[i] = std::move(sample);
  });
  for (const auto& s : result.per_line) {
    result.value = std::max(result.value, s.measure);
    result.unbounded_suspected = result.unbounded_suspected || s.touches_window;
  }
  return result;
}

/// sup over probe lines of the integral of |x_N|^{2 delta} e^{2 gamma |x_N|}
/// over the line's intersection with the set (Gauss-Legendre on each piece).
inline double weighted_section(const SectionMeasure& sections, int dim, double delta, double gamma) {
  static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                      0.5384693101056831, 0.9061798459386640};
  static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};
  const auto basis = detail::complement_basis(sections.direction);
  double best = 0.0;
  for (const auto& line : sections.per_line) {
    double base_n = 0.0;
    for (std::size_t b = 0; b < basis.size(); ++b) base_n += line.x_prime[b] * basis[b][dim - 1];
    const double nu_n = sections.direction[dim - 1];
    double total = 0.0;
    for (const auto& iv : line.intervals) {
      const int pieces = std::max(1, static_cast<int>(std::ceil((iv.hi - iv.lo) / 0.05)));
      const double w = (iv.hi - iv.lo) / pieces;
      for (int p = 0; p < pieces; ++p) {
        const double mid = iv.lo + (p + 0.5) * w;
        for (int q = 0; q < 5; ++q) {
          const double xn = std::abs(base_n + (mid + 0.5 * w * nodes[q]) * nu_n);
          total += 0.5 * w * weights[q] * std::pow(xn, 2.0 * delta) * std::exp(2.0 * gamma * xn);
        }
      }
    }
    best = std::max(best, total);
  }
  return best;
}

/// Evenly spaced x' probes on [lo, hi] (one coordinate).
inline std::vector<std::vector<double>> probe_line_grid(double lo, double hi, std::size_t count) {
  require(count >= 1, "probe grid needs at least one point");
  std::vector<std::vector<double>> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = {count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1)};
  return out;
}

}  // namespace epilab::geometry
