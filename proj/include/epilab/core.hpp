// Shared vocabulary for the epigraph laboratory: coordinates, the extended
// real used for thresholds, error kinds and a small deterministic parallel
// loop.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace epilab {

inline constexpr int kMaxDim = 3;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kE = 2.71828182845904523536;

/// Fixed-capacity point; only the first `dim` entries are meaningful.
using Coord = std::array<double, kMaxDim>;

inline std::span<const double> view(const Coord& c, int dim) {
  return {c.data(), static_cast<std::size_t>(dim)};
}

enum class ErrorKind {
  validation,  // bad input or configuration
  numerical,   // solver did not converge, singular system, ...
  domain,      // evaluation outside a function's domain
  geometry,    // window, reflection or ball constraints
  singular,    // operator not positive definite / Jacobian singular
};

class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw LabError(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::validation, what);
}

/// A real number or +infinity. Threshold arithmetic never mixes a float
/// infinity into computations; callers branch on is_infinite().
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr explicit ExtReal(double v) : value_(v) {}

  static constexpr ExtReal infinity() {
    ExtReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) fail(ErrorKind::domain, "value() requested from infinite ExtReal");
    return value_;
  }

  friend constexpr std::partial_ordering operator<=>(const ExtReal& a, const ExtReal& b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }
  friend constexpr bool operator==(const ExtReal& a, const ExtReal& b) {
    return (a <=> b) == std::partial_ordering::equivalent;
  }
  friend constexpr std::partial_ordering operator<=>(const ExtReal& a, double b) {
    return a <=> ExtReal(b);
  }

  std::string str() const {
    if (infinite_) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << value_;
    return os.str();
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

/// Worker count: hardware concurrency capped by EPIGRAPH_LAB_THREADS.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EPIGRAPH_LAB_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs body(i) for i in [0, n). Each index owns its output slot, so the
/// result does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace epilab
