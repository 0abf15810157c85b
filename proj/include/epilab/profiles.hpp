// Closed-form solutions used as oracles and as initial data, each paired with
// the nonlinearity it solves.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "epilab/core.hpp"
#include "epilab/nonlinearity.hpp"

namespace epilab::profiles {

/// u depending only on the last coordinate y = x_N.
struct Profile {
  std::string name;
  std::function<double(double)> u;
  std::function<double(double)> du;  // d/dy
  nonlinearity::Nonlinearity f;

  std::function<double(const Coord&)> field(int dim) const {
    auto uu = u;
    return [uu, dim](const Coord& x) { return uu(x[dim - 1]); };
  }
};

/// 1 - (y - 1)^4 below y = 1, constant 1 above. Solves -u'' = 12 sqrt(1 - u).
inline Profile plateau() {
  return {"plateau",
          [](double y) {
            if (y >= 1.0) return 1.0;
            const double s = y - 1.0;
            return 1.0 - s * s * s * s;
          },
          [](double y) {
            if (y >= 1.0) return 0.0;
            const double s = y - 1.0;
            return -4.0 * s * s * s;
          },
          nonlinearity::plateau()};
}

/// 0 up to y = 1, bumps (1 - (y - c)^4)^4 centred at c = 2 on (1, 3] and
/// c = 4 on (3, 4], then 1. Rises, falls back to 0 at y = 3, rises again.
inline Profile double_bump() {
  auto piece = [](double y, double& du) {
    du = 0.0;
    if (y <= 1.0) return 0.0;
    if (y > 4.0) return 1.0;
    const double s = y <= 3.0 ? y - 2.0 : y - 4.0;
    const double v = 1.0 - s * s * s * s;
    du = -16.0 * v * v * v * s * s * s;
    return v * v * v * v;
  };
  return {"double_bump",
          [piece](double y) {
            double d;
            return piece(y, d);
          },
          [piece](double y) {
            double d;
            piece(y, d);
            return d;
          },
          nonlinearity::sign_change()};
}

/// tanh(y / sqrt 2), the heteroclinic of -u'' = u - u^3.
inline Profile tanh_front() {
  const double k = 1.0 / std::sqrt(2.0);
  return {"tanh_front",
          [k](double y) { return std::tanh(k * y); },
          [k](double y) {
            const double c = std::cosh(k * y);
            return k / (c * c);
          },
          nonlinearity::allen_cahn()};
}

/// sin(y): -u'' = u on the strip 0 < y < pi.
inline Profile sine() {
  return {"sine", [](double y) { return std::sin(y); }, [](double y) { return std::cos(y); },
          nonlinearity::linear(1.0)};
}

/// Torsion on the strip lo < y < hi: -u'' = 1.
inline Profile strip_torsion(double lo, double hi) {
  return {"torsion",
          [=](double y) { return 0.5 * (y - lo) * (hi - y); },
          [=](double y) { return 0.5 * (lo + hi) - y; },
          nonlinearity::constant(1.0)};
}

/// sin(m y) with exact zeros at multiples of pi/m: the argument is reduced
/// to [-pi/2, pi/2] using the integer part of m y / pi.
inline double sin_reduced(int m, double y) {
  const double t = m * y / kPi;
  const double k = std::nearbyint(t);
  if (t == k) return 0.0;
  const double r = (t - k) * kPi;
  const double s = std::sin(r);
  return std::fmod(std::abs(k), 2.0) == 1.0 ? -s : s;
}

/// cosh(m x_1) sin(m x_2): harmonic on the strip 0 < x_2 < pi and zero on its
/// boundary, with exponential growth in x_1.
inline std::function<double(const Coord&)> harmonic_growth(int m) {
  return [m](const Coord& x) { return std::cosh(m * x[0]) * sin_reduced(m, x[1]); };
}

/// (1 - |x|^2) / 4 on the unit disk: -Delta u = 1 in two dimensions.
inline double disk_torsion(const Coord& x) { return 0.25 * (1.0 - x[0] * x[0] - x[1] * x[1]); }

}  // namespace epilab::profiles
