// Catalog of nonlinearities f in -Delta u = f(u), their Lipschitz data on
// compact ranges, and the explicit smallness/growth thresholds under which
// the comparison principles hold.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "epilab/core.hpp"

namespace epilab::nonlinearity {

struct Constant {
  double k = 1.0;
};
struct Linear {
  double c = 1.0;
};
/// f(t) = t - t^3.
struct AllenCahn {};
/// f(t) = (t^+)^q.
struct Power {
  double q = 2.0;
};
/// Non-increasing and 1/2-Hölder: 12 for t < 0, 12 sqrt(1 - t) on [0,1], 0 above.
/// Pairs with the flat-topped profile 1 - (x_N - 1)^4.
struct Plateau {};
/// Sign-changing and 1/2-Hölder on [0,1], zero elsewhere. Pairs with the
/// double-bump profile whose x_N-derivative changes sign.
struct SignChange {};
/// Piecewise-linear interpolation of (t, f) samples; evaluation outside the
/// table range is an error.
struct Table {
  std::vector<double> t;
  std::vector<double> f;
};

using Kind = std::variant<Constant, Linear, AllenCahn, Power, Plateau, SignChange, Table>;

class Nonlinearity {
 public:
  Nonlinearity() = default;
  explicit Nonlinearity(Kind kind) : kind_(std::move(kind)) {
    if (auto* tab = std::get_if<Table>(&kind_)) {
      require(tab->t.size() >= 2 && tab->t.size() == tab->f.size(),
              "custom_table: need at least two (t, f) rows");
      for (std::size_t i = 1; i < tab->t.size(); ++i)
        require(tab->t[i] > tab->t[i - 1], "custom_table: t must be strictly increasing");
    }
    if (auto* p = std::get_if<Power>(&kind_)) require(p->q > 0.0, "power: q must be positive");
  }

  const Kind& kind() const { return kind_; }

  std::string tag() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) return "constant";
          else if constexpr (std::is_same_v<K, Linear>) return "linear";
          else if constexpr (std::is_same_v<K, AllenCahn>) return "allen_cahn";
          else if constexpr (std::is_same_v<K, Power>) return "power";
          else if constexpr (std::is_same_v<K, Plateau>) return "plateau";
          else if constexpr (std::is_same_v<K, SignChange>) return "sign_change";
          else return "custom_table";
        },
        kind_);
  }

  double operator()(double t) const;
  double f0() const { return (*this)(0.0); }

  /// f(s) >= f(t) whenever s < t.
  bool monotone_nonincreasing() const {
    return std::visit(
        [](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) return true;
          else if constexpr (std::is_same_v<K, Linear>) return k.c <= 0.0;
          else if constexpr (std::is_same_v<K, Plateau>) return true;
          else if constexpr (std::is_same_v<K, Table>) {
            for (std::size_t i = 1; i < k.f.size(); ++i)
              if (k.f[i] > k.f[i - 1]) return false;
            return true;
          } else return false;
        },
        kind_);
  }

  /// Declared, not detected: liminf_{t -> 0+} f(t)/t > 0.
  bool liminf_ratio_positive() const {
    return std::visit(
        [](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) return k.k > 0.0;
          else if constexpr (std::is_same_v<K, Linear>) return k.c > 0.0;
          else if constexpr (std::is_same_v<K, AllenCahn>) return true;
          else if constexpr (std::is_same_v<K, Power>) return k.q <= 1.0;
          else if constexpr (std::is_same_v<K, Plateau>) return true;
          else return false;
        },
        kind_);
  }

  /// Whether f' exists on the whole line (Newton is allowed).
  bool smooth() const {
    return std::visit(
        [](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Power>) return k.q > 1.0;
          else return std::is_same_v<K, Constant> || std::is_same_v<K, Linear> ||
                      std::is_same_v<K, AllenCahn>;
        },
        kind_);
  }

  /// f'(t), or nullopt where f is not differentiable.
  std::optional<double> derivative(double t) const;

 private:
  Kind kind_ = Linear{1.0};
};

inline Nonlinearity constant(double k) { return Nonlinearity(Constant{k}); }
inline Nonlinearity linear(double c) { return Nonlinearity(Linear{c}); }
inline Nonlinearity allen_cahn() { return Nonlinearity(AllenCahn{}); }
inline Nonlinearity power(double q) { return Nonlinearity(Power{q}); }
inline Nonlinearity plateau() { return Nonlinearity(Plateau{}); }
inline Nonlinearity sign_change() { return Nonlinearity(SignChange{}); }
inline Nonlinearity table(std::vector<double> t, std::vector<double> f) {
  return Nonlinearity(Table{std::move(t), std::move(f)});
}

inline std::vector<std::string> catalog() {
  return {"constant", "linear", "allen_cahn", "power", "plateau", "sign_change", "custom_table"};
}

namespace detail {

inline double sign_change_value(double t) {
  const double s = std::pow(t, 0.25);
  return -192.0 * std::sqrt(std::max(0.0, t * (1.0 - s))) * (1.0 - 1.25 * s);
}

// On (0,1) with s = t^{1/4}, A = t(1 - s), B = 1 - 5s/4: A' = B and
// B' = -(5/16) t^{-3/4}, so f' = -192 (B^2 / (2 sqrt A) + sqrt(A) B').
inline double sign_change_slope(double t) {
  const double s = std::pow(t, 0.25);
  const double a = t * (1.0 - s);
  const double b = 1.0 - 1.25 * s;
  const double db = -(5.0 / 16.0) * std::pow(t, -0.75);
  return -192.0 * (b * b / (2.0 * std::sqrt(a)) + std::sqrt(a) * db);
}

/// max of |d(t)| on [a, b]: dense sampling followed by golden-section
/// refinement around the best sample.
template <class D>
double sup_abs(D d, double a, double b) {
  constexpr int samples = 4096;
  double best = 0.0;
  int arg = 0;
  for (int i = 0; i <= samples; ++i) {
    const double t = a + (b - a) * i / samples;
    const double v = std::abs(d(t));
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  double lo = a + (b - a) * std::max(0, arg - 1) / samples;
  double hi = a + (b - a) * std::min(samples, arg + 1) / samples;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = std::abs(d(x1)), f2 = std::abs(d(x2));
  for (int it = 0; it < 100; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = std::abs(d(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = std::abs(d(x2));
    }
  }
  return std::max({best, f1, f2});
}

}  // namespace detail

inline double Nonlinearity::operator()(double t) const {
  return std::visit(
      [t](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Constant>) {
          return k.k;
        } else if constexpr (std::is_same_v<K, Linear>) {
          return k.c * t;
        } else if constexpr (std::is_same_v<K, AllenCahn>) {
          return t - t * t * t;
        } else if constexpr (std::is_same_v<K, Power>) {
          return t > 0.0 ? std::pow(t, k.q) : 0.0;
        } else if constexpr (std::is_same_v<K, Plateau>) {
          if (t < 0.0) return 12.0;
          if (t <= 1.0) return 12.0 * std::sqrt(1.0 - t);
          return 0.0;
        } else if constexpr (std::is_same_v<K, SignChange>) {
          if (t < 0.0 || t > 1.0) return 0.0;
          return detail::sign_change_value(t);
        } else {
          if (t < k.t.front() || t > k.t.back())
            fail(ErrorKind::domain, "custom_table: domain exceeded at t = " + ExtReal(t).str());
          auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
          std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - k.t.begin()), k.t.size() - 1);
          i = std::max<std::size_t>(i, 1);
          const double w = (t - k.t[i - 1]) / (k.t[i] - k.t[i - 1]);
          return (1.0 - w) * k.f[i - 1] + w * k.f[i];
        }
      },
      kind_);
}

inline std::optional<double> Nonlinearity::derivative(double t) const {
  return std::visit(
      [t](const auto& k) -> std::optional<double> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Constant>) {
          return 0.0;
        } else if constexpr (std::is_same_v<K, Linear>) {
          return k.c;
        } else if constexpr (std::is_same_v<K, AllenCahn>) {
          return 1.0 - 3.0 * t * t;
        } else if constexpr (std::is_same_v<K, Power>) {
          if (t < 0.0) return 0.0;
          if (t == 0.0 && k.q <= 1.0) return std::nullopt;
          return k.q * std::pow(t, k.q - 1.0);
        } else if constexpr (std::is_same_v<K, Plateau>) {
          if (t < 0.0 || t > 1.0) return 0.0;
          if (t == 0.0 || t == 1.0) return std::nullopt;
          return -6.0 / std::sqrt(1.0 - t);
        } else if constexpr (std::is_same_v<K, SignChange>) {
          if (t < 0.0 || t > 1.0) return 0.0;
          if (t == 0.0 || t == 1.0) return std::nullopt;
          return detail::sign_change_slope(t);
        } else {
          if (t < k.t.front() || t > k.t.back()) return std::nullopt;
          auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
          std::size_t i = static_cast<std::size_t>(it - k.t.begin());
          if (i == 0 || i >= k.t.size()) return std::nullopt;
          if (t == k.t[i - 1] && i > 1) return std::nullopt;
          return (k.f[i] - k.f[i - 1]) / (k.t[i] - k.t[i - 1]);
        }
      },
      kind_);
}

/// sup |f'| over [m, M], or infinity where f is not Lipschitz there.
inline ExtReal lipschitz_on(const Nonlinearity& f, double m, double M) {
  require(m <= M, "lipschitz_on: need m <= M");
  return std::visit(
      [&](const auto& k) -> ExtReal {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Constant>) {
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<K, Linear>) {
          return ExtReal(std::abs(k.c));
        } else if constexpr (std::is_same_v<K, AllenCahn>) {
          double s = std::max(std::abs(1.0 - 3.0 * m * m), std::abs(1.0 - 3.0 * M * M));
          if (m <= 0.0 && 0.0 <= M) s = std::max(s, 1.0);
          return ExtReal(s);
        } else if constexpr (std::is_same_v<K, Power>) {
          if (M <= 0.0) return ExtReal(0.0);
          if (k.q == 1.0) return ExtReal(1.0);
          if (k.q > 1.0) return ExtReal(k.q * std::pow(M, k.q - 1.0));
          if (m > 0.0) return ExtReal(k.q * std::pow(m, k.q - 1.0));
          return ExtReal::infinity();
        } else if constexpr (std::is_same_v<K, Plateau>) {
          // |f'| = 6 / sqrt(1 - t) increases on (0, 1) and blows up at 1.
          if (m >= 1.0 || M <= 0.0) return ExtReal(0.0);
          if (M >= 1.0) return ExtReal::infinity();
          return ExtReal(6.0 / std::sqrt(1.0 - M));
        } else if constexpr (std::is_same_v<K, SignChange>) {
          if (m >= 1.0 || M <= 0.0) return ExtReal(0.0);
          if (m <= 0.0 || M >= 1.0) return ExtReal::infinity();
          return ExtReal(detail::sup_abs(detail::sign_change_slope, m, M));
        } else {
          double s = 0.0;
          for (std::size_t i = 1; i < k.t.size(); ++i)
            s = std::max(s, std::abs((k.f[i] - k.f[i - 1]) / (k.t[i] - k.t[i - 1])));
          return ExtReal(s);
        }
      },
      f.kind());
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

struct ThresholdParams {
  double lipschitz = 0.0;  // L
  double gamma = 0.0;      // exponential growth rate
  double delta = 0.0;      // polynomial growth exponent
  double prefactor = 1.0;  // a
  double section = 1.0;    // S

  void validate() const {
    require(lipschitz >= 0.0, "threshold: L must be >= 0");
    require(gamma >= 0.0, "threshold: gamma must be >= 0");
    require(delta >= 0.0, "threshold: delta must be >= 0");
    require(prefactor > 0.0, "threshold: a must be > 0");
    require(section > 0.0, "threshold: S must be > 0");
  }
};

/// Largest section for which comparison holds with a bounded Lipschitz f:
/// pi / sqrt(2L); infinite for L = 0 (non-increasing f needs no smallness).
inline ExtReal epsilon_bounded(double lipschitz) {
  require(lipschitz >= 0.0, "epsilon_bounded: L must be >= 0");
  if (lipschitz == 0.0) return ExtReal::infinity();
  return ExtReal(kPi / std::sqrt(2.0 * lipschitz));
}

/// pi / sqrt(16 (e - 1) gamma^2 + 2L) for solutions with growth rate gamma.
inline ExtReal epsilon_growth(double lipschitz, double gamma) {
  require(lipschitz >= 0.0 && gamma >= 0.0, "epsilon_growth: L and gamma must be >= 0");
  const double d = 16.0 * (kE - 1.0) * gamma * gamma + 2.0 * lipschitz;
  if (d == 0.0) return ExtReal::infinity();
  return ExtReal(kPi / std::sqrt(d));
}

/// Admissible exponential growth rates are [0, gamma_max(S)).
inline double gamma_max(double section) {
  require(section > 0.0, "gamma_max: S must be > 0");
  return kPi / (4.0 * section * std::sqrt(kE - 1.0));
}

/// Step length that turns the doubling factor alpha h^2 + 1 into e.
inline double growth_step(double alpha) {
  require(alpha > 0.0, "growth: alpha must be > 0");
  return std::sqrt((kE - 1.0) / alpha);
}

/// w(A) (alpha h^2 + 1)^{(R - A)/h - 1} for a user-chosen step h.
inline double growth_lower_bound_with_step(double alpha, double a, double w_a, double r, double h) {
  require(alpha > 0.0 && a > 0.0 && w_a > 0.0 && h > 0.0, "growth: alpha, A, w(A), h must be > 0");
  if (r < a + h) fail(ErrorKind::domain, "growth: R below first doubling step");
  return w_a * std::pow(alpha * h * h + 1.0, (r - a) / h - 1.0);
}

/// Lower bound on w(R) = int_{C(R)} ((u - v)^+)^2 once w(A) > 0, with the
/// step h = sqrt((e - 1)/alpha): w(A) e^{(R - A)/h - 1}.
inline double growth_lower_bound(double alpha, double a, double w_a, double r) {
  require(alpha > 0.0 && a > 0.0 && w_a > 0.0, "growth: alpha, A, w(A) must be > 0");
  const double h = growth_step(alpha);
  if (r < a + h) fail(ErrorKind::domain, "growth: R below first doubling step");
  return w_a * std::exp((r - a) / h - 1.0);
}

/// pi^2 / S^2: the per-line Poincare factor for sections of length <= S.
inline double poincare_factor(double section) {
  require(section > 0.0, "poincare: S must be > 0");
  return kPi * kPi / (section * section);
}

/// 4 / (pi^2/S^2 - 2L); infinite when the bracket is not positive.
inline ExtReal localization_constant(double section, double lipschitz) {
  const double gap = poincare_factor(section) - 2.0 * lipschitz;
  if (gap <= 0.0) return ExtReal::infinity();
  return ExtReal(4.0 / gap);
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// Polynomial ceiling 4 M^2 S omega_{N-1} R^{N-1} for bounded u, v.
inline double growth_upper_bound(double bound_m, double section, int dim, double r) {
  return 4.0 * bound_m * bound_m * section * unit_ball_volume(dim - 1) * std::pow(r, dim - 1);
}

/// Smallest R (on a step-`dr` scan) where the exponential lower bound
/// exceeds the polynomial ceiling, i.e. where w(A) > 0 becomes untenable.
inline double growth_contradiction_radius(double alpha, double a, double w_a, double bound_m,
                                          double section, int dim, double dr = 0.01,
                                          double r_max = 1e6) {
  double r = a + growth_step(alpha);
  for (; r <= r_max; r += dr)
    if (growth_lower_bound(alpha, a, w_a, r) > growth_upper_bound(bound_m, section, dim, r)) return r;
  fail(ErrorKind::numerical, "growth: no contradiction radius below r_max");
}

}  // namespace epilab::nonlinearity
