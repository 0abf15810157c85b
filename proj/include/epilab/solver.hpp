// Linear and semilinear Dirichlet solves on DomainGrids, and the principal
// eigenpair of -Delta_h.
#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "epilab/core.hpp"
#include "epilab/discretization.hpp"
#include "epilab/nonlinearity.hpp"

namespace epilab::solver {

using discretization::DirichletLaplacian;
using discretization::DomainGrid;
using discretization::SparseOperator;
using discretization::Trace;
using nonlinearity::Nonlinearity;

enum class Method { linear, newton, picard, closed_form };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::linear: return "linear";
    case Method::newton: return "newton";
    case Method::picard: return "picard";
    case Method::closed_form: return "closed_form";
  }
  return "unknown";
}

/// Grid function u on the interior nodes, with the Dirichlet trace that
/// defines it everywhere else.
struct SolutionField {
  std::shared_ptr<const DomainGrid> grid;
  std::vector<double> values;
  Trace trace;
  std::string trace_label = "zero";
  double residual_norm = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  Method method = Method::linear;
  std::string notes;

  /// u at any lattice node: the solved value at interior nodes, the trace
  /// elsewhere (box faces and exterior nodes).
  double at_lattice(std::size_t id) const {
    const long eq = grid->equation(id);
    if (eq >= 0) return values[static_cast<std::size_t>(eq)];
    return trace(grid->coord(id));
  }
};

/// Samples a closed-form function on the grid; the function is also the trace.
inline SolutionField sample_field(std::shared_ptr<const DomainGrid> grid,
                                  std::function<double(const Coord&)> fn, std::string label) {
  SolutionField s;
  s.values = discretization::sample(*grid, fn);
  s.grid = std::move(grid);
  s.trace = std::move(fn);
  s.trace_label = std::move(label);
  s.method = Method::closed_form;
  return s;
}

// ---------------------------------------------------------------------------
// Linear solves
// ---------------------------------------------------------------------------

struct LinearSolve {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
  std::string method;
};

struct LinearOptions {
  double tol = 1e-13;
  int max_iterations = 0;  // 0: 20 n + 1000
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> inverse_diagonal(const SparseOperator& op) {
  std::vector<double> d(op.size());
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double v = op.diagonal(i);
    d[i] = v != 0.0 ? 1.0 / v : 1.0;
  }
  return d;
}

inline double true_relative_residual(const SparseOperator& op, std::span<const double> x,
                                     std::span<const double> b, double bnorm) {
  auto ax = op.apply(x);
  for (std::size_t i = 0; i < ax.size(); ++i) ax[i] = b[i] - ax[i];
  return norm2(ax) / bnorm;
}

/// Jacobi-preconditioned conjugate gradients. A non-positive curvature
/// p^T A p <= 0 means the operator is not positive definite.
inline LinearSolve pcg(const SparseOperator& op, std::span<const double> b, const LinearOptions& opt,
                       int max_it) {
  const std::size_t n = op.size();
  const double bnorm = norm2(b);
  const auto dinv = inverse_diagonal(op);
  std::vector<double> x(n, 0.0), r(b.begin(), b.end()), z(n), p(n), ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_it; ++it) {
    op.apply(p, ap);
    const double curv = dot(p, ap);
    if (!(curv > 0.0))
      fail(ErrorKind::singular, "operator is not positive definite (p^T A p = " + ExtReal(curv).str() + ")");
    const double alpha = rz / curv;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if (norm2(r) <= opt.tol * bnorm) {
      const double rel = true_relative_residual(op, x, b, bnorm);
      if (rel <= 10.0 * opt.tol) return {std::move(x), it, rel, "cg"};
      // The recurrence drifted from the true residual: restart from x.
      const auto ax = op.apply(x);
      for (std::size_t i = 0; i < n; ++i) {
        r[i] = b[i] - ax[i];
        z[i] = dinv[i] * r[i];
      }
      p = z;
      rz = dot(r, z);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  const double rel = true_relative_residual(op, x, b, bnorm);
  fail(ErrorKind::numerical, "no convergence: cg after " + std::to_string(max_it) +
                                 " iterations, relative residual " + ExtReal(rel).str());
}

/// Right-Jacobi-preconditioned BiCGSTAB for the non-symmetric cut-cell case.
/// When the recurrence residual reaches tol but the true residual does not,
/// the iteration restarts from the current x; three restarts without
/// halving the true residual count as stagnation.
inline LinearSolve bicgstab(const SparseOperator& op, std::span<const double> b,
                            const LinearOptions& opt, int max_it) {
  const std::size_t n = op.size();
  const double bnorm = norm2(b);
  const auto dinv = inverse_diagonal(op);
  std::vector<double> x(n, 0.0), r(b.begin(), b.end()), r0 = r, p(n, 0.0), v(n, 0.0), s(n), t(n),
      ph(n), sh(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double last_restart_rel = std::numeric_limits<double>::infinity();
  int stalls = 0;
  // Returns true when x is accepted; otherwise resets the recurrence.
  auto settle = [&](int it, LinearSolve& out) {
    const double rel = true_relative_residual(op, x, b, bnorm);
    if (rel <= 10.0 * opt.tol) {
      out = {x, it, rel, "bicgstab"};
      return true;
    }
    if (rel > 0.5 * last_restart_rel && ++stalls >= 3)
      fail(ErrorKind::numerical, "no convergence: bicgstab stagnated at relative residual " + ExtReal(rel).str());
    last_restart_rel = std::min(last_restart_rel, rel);
    const auto ax = op.apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    r0 = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    rho = alpha = omega = 1.0;
    return false;
  };
  LinearSolve out;
  for (int it = 1; it <= max_it; ++it) {
    if (norm2(r) <= opt.tol * bnorm && settle(it - 1, out)) return out;
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) fail(ErrorKind::numerical, "bicgstab breakdown (rho = 0)");
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) ph[i] = dinv[i] * p[i];
    op.apply(ph, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) fail(ErrorKind::numerical, "bicgstab breakdown (r0.v = 0)");
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) <= opt.tol * bnorm) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * ph[i];
      if (settle(it, out)) return out;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) sh[i] = dinv[i] * s[i];
    op.apply(sh, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    if (omega == 0.0) fail(ErrorKind::numerical, "bicgstab breakdown (omega = 0)");
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
  }
  const double rel = true_relative_residual(op, x, b, bnorm);
  fail(ErrorKind::numerical, "no convergence: bicgstab after " + std::to_string(max_it) +
                                 " iterations, relative residual " + ExtReal(rel).str());
}

/// f'(t), or a centred secant of half-width 1e-8 max(1, |t|) where f has
/// no derivative.
inline double slope_or_secant(const Nonlinearity& f, double t) {
  if (auto d = f.derivative(t)) return *d;
  const double e = 1e-8 * std::max(1.0, std::abs(t));
  return (f(t + e) - f(t - e)) / (2.0 * e);
}

}  // namespace detail

/// Solves op x = rhs to relative residual tol: CG when op is symmetric,
/// BiCGSTAB otherwise.
inline LinearSolve solve_linear(const SparseOperator& op, std::span<const double> rhs,
                                const LinearOptions& opt = {}) {
  require(rhs.size() == op.size(), "solve_linear: dimension mismatch");
  require(opt.tol > 0.0, "solve_linear: tol must be positive");
  const int max_it = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(20 * op.size() + 1000);
  if (detail::norm2(rhs) == 0.0) return {std::vector<double>(op.size(), 0.0), 0, 0.0, "trivial"};
  return op.symmetric() ? detail::pcg(op, rhs, opt, max_it) : detail::bicgstab(op, rhs, opt, max_it);
}

/// A discretized Dirichlet problem: grid, assembled operator and trace.
struct Problem {
  std::shared_ptr<const DomainGrid> grid;
  DirichletLaplacian laplacian;
  Trace trace;
  std::string trace_label = "zero";
  std::vector<double> load;  // boundary contribution of the trace

  static Problem make(std::shared_ptr<const DomainGrid> grid, Trace trace = discretization::zero_trace(),
                      std::string label = "zero") {
    Problem p;
    p.laplacian = discretization::assemble_laplacian(*grid);
    p.load = discretization::boundary_load(p.laplacian, trace);
    p.grid = std::move(grid);
    p.trace = std::move(trace);
    p.trace_label = std::move(label);
    return p;
  }

  const SparseOperator& op() const { return laplacian.op; }
};

/// -Delta_h u = rhs in the interior, u = trace on the boundary.
inline SolutionField solve_poisson(const Problem& pb, std::span<const double> rhs,
                                   const LinearOptions& opt = {}) {
  std::vector<double> b(pb.load);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += rhs[i];
  auto sol = solve_linear(pb.op(), b, opt);
  SolutionField s;
  s.grid = pb.grid;
  s.values = std::move(sol.x);
  s.trace = pb.trace;
  s.trace_label = pb.trace_label;
  s.iterations = sol.iterations;
  s.method = Method::linear;
  auto lap = discretization::stencil_apply(*pb.grid, s.values, pb.trace);
  double res = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) res = std::max(res, std::abs(lap[i] - rhs[i]));
  s.residual_norm = res;
  return s;
}

// ---------------------------------------------------------------------------
// Semilinear solves
// ---------------------------------------------------------------------------

struct SemilinearPolicy {
  Method method = Method::newton;
  double tol = 1e-10;   // max-norm of A u - load - f(u)
  int max_iterations = 200;
  double damping = 1.0;  // in (0, 1]
  bool monotone_shift = true;  // picard: treat the non-increasing part of f implicitly
  LinearOptions linear{1e-13, 0};

  void validate() const {
    require(method == Method::newton || method == Method::picard, "semilinear: method must be newton or picard");
    require(tol > 0.0, "semilinear: tol must be positive");
    require(max_iterations > 0, "semilinear: max_iterations must be positive");
    require(damping > 0.0 && damping <= 1.0, "semilinear: damping must lie in (0, 1]");
  }
};

/// Max-norm of A u - load - f(u) through the assembled operator.
inline double semilinear_residual(const Problem& pb, const Nonlinearity& f, std::span<const double> u) {
  auto au = pb.op().apply(u);
  double r = 0.0;
  for (std::size_t i = 0; i < au.size(); ++i) r = std::max(r, std::abs(au[i] - pb.load[i] - f(u[i])));
  return r;
}

/// The same residual computed from the stencil arms directly.
inline double independent_residual(const Problem& pb, const Nonlinearity& f, std::span<const double> u) {
  auto lap = discretization::stencil_apply(*pb.grid, u, pb.trace);
  double r = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) r = std::max(r, std::abs(lap[i] - f(u[i])));
  return r;
}

/// Default initial guess: -Delta_h u = f(0) with the problem's trace.
inline std::vector<double> torsion_lift(const Problem& pb, const Nonlinearity& f, const LinearOptions& opt = {}) {
  std::vector<double> rhs(pb.grid->size(), f.f0());
  return solve_poisson(pb, rhs, opt).values;
}

/// Solves -Delta_h u = f(u). Newton uses the exact Jacobian A - diag(f'(u))
/// with step halving down to 2^-10; non-smooth f falls back to Picard.
inline SolutionField solve_semilinear(const Problem& pb, const Nonlinearity& f,
                                      std::optional<std::vector<double>> init = std::nullopt,
                                      SemilinearPolicy policy = {}) {
  policy.validate();
  std::vector<double> u = init ? std::move(*init) : torsion_lift(pb, f, policy.linear);
  require(u.size() == pb.grid->size(), "semilinear: initial guess has wrong size");
  const std::size_t n = u.size();

  SolutionField s;
  s.grid = pb.grid;
  s.trace = pb.trace;
  s.trace_label = pb.trace_label;

  Method method = policy.method;
  if (method == Method::newton && !f.smooth()) {
    method = Method::picard;
    s.notes = "fallback to picard: f not differentiable on range";
  }
  s.method = method;

  double res = semilinear_residual(pb, f, u);
  int it = 0;
  if (method == Method::newton) {
    std::vector<double> slope(n), neg_res(n), trial(n);
    for (; it < policy.max_iterations && res > policy.tol; ++it) {
      auto au = pb.op().apply(u);
      for (std::size_t i = 0; i < n; ++i) {
        const auto d = f.derivative(u[i]);
        if (!d) fail(ErrorKind::numerical, "semilinear: f not differentiable at u = " + ExtReal(u[i]).str());
        slope[i] = *d;
        neg_res[i] = -(au[i] - pb.load[i] - f(u[i]));
      }
      const auto jac = pb.op().shifted(slope);
      LinearSolve step;
      try {
        step = solve_linear(jac, neg_res, policy.linear);
      } catch (const LabError& e) {
        if (e.kind() == ErrorKind::singular || e.kind() == ErrorKind::numerical)
          fail(ErrorKind::singular, std::string("jacobian singular: ") + e.what());
        throw;
      }
      double t = policy.damping;
      for (;;) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * step.x[i];
        const double r_new = semilinear_residual(pb, f, trial);
        if (r_new < res) {
          u.swap(trial);
          res = r_new;
          break;
        }
        t *= 0.5;
        if (t < std::ldexp(1.0, -10))
          fail(ErrorKind::numerical, "no convergence: newton damping floor reached at residual " + ExtReal(res).str());
      }
    }
  } else {
    // u+ solves (A + diag s) u+ = load + f(u) + s u with s = max(0, -f'(u)):
    // the non-increasing part of f is taken implicitly, the rest explicitly.
    // With s = 0 this is plain Picard. Steps are damped like Newton.
    std::vector<double> rhs(n), shift(n), trial(n);
    for (; it < policy.max_iterations && res > policy.tol; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        shift[i] = policy.monotone_shift ? std::max(0.0, -detail::slope_or_secant(f, u[i])) : 0.0;
        rhs[i] = pb.load[i] + f(u[i]) + shift[i] * u[i];
      }
      std::vector<double> neg(n);
      for (std::size_t i = 0; i < n; ++i) neg[i] = -shift[i];
      const auto next = solve_linear(pb.op().shifted(neg), rhs, policy.linear).x;
      double t = policy.damping;
      for (;;) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = (1.0 - t) * u[i] + t * next[i];
        const double r_new = semilinear_residual(pb, f, trial);
        if (r_new < res) {
          u.swap(trial);
          res = r_new;
          break;
        }
        t *= 0.5;
        if (t < std::ldexp(1.0, -10))
          fail(ErrorKind::numerical, "no convergence: picard damping floor reached at residual " + ExtReal(res).str());
      }
    }
  }
  if (res > policy.tol)
    fail(ErrorKind::numerical, "no convergence: " + to_string(method) + " after " + std::to_string(it) +
                                   " iterations, residual " + ExtReal(res).str());
  s.values = std::move(u);
  s.iterations = it;
  s.residual_norm = independent_residual(pb, f, s.values);
  return s;
}

// ---------------------------------------------------------------------------
// Principal eigenpair
// ---------------------------------------------------------------------------

struct EigenPair {
  double lambda1 = 0.0;
  std::vector<double> phi1;  // positive, max-normalized to 1
  int iterations = 0;
  double residual = 0.0;     // ||A phi - lambda phi||_inf
};

/// Inverse power iteration with shift 0 from the all-ones vector. Stops when
/// the eigenvalue changes by less than tol (relative) and the eigen-residual
/// is below 1e-9 lambda.
inline EigenPair principal_eigenpair(const SparseOperator& op, double tol = 1e-12, int max_iterations = 2000) {
  require(tol > 0.0, "eigenpair: tol must be positive");
  const std::size_t n = op.size();
  std::vector<double> x(n, 1.0);
  double lambda = 0.0;
  LinearOptions lin{1e-13, 0};
  for (int it = 1; it <= max_iterations; ++it) {
    auto y = solve_linear(op, x, lin).x;
    const double est = detail::dot(y, x) / detail::dot(y, y);
    const double ymax = max_abs(y);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ymax;
    const auto ax = op.apply(x);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(ax[i] - est * x[i]));
    const bool settled = it > 1 && std::abs(est - lambda) <= tol * est;
    lambda = est;
    if (settled && res <= 1e-9 * lambda) {
      for (double v : x)
        if (!(v > 0.0)) fail(ErrorKind::numerical, "eigenpair: eigenvector lost positivity");
      return {lambda, std::move(x), it, res};
    }
  }
  fail(ErrorKind::numerical, "no convergence: inverse iteration after " + std::to_string(max_iterations) + " sweeps");
}

}  // namespace epilab::solver
