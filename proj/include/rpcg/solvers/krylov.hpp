#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "rpcg/core/errors.hpp"
#include "rpcg/core/rng.hpp"
#include "rpcg/core/spd_matrix.hpp"
#include "rpcg/solvers/config.hpp"

namespace rpcg {

/// Scalars recorded for iteration k of the CG recursion.
template <typename Scalar>
struct KrylovStep {
  Scalar alpha;
  /// s_k^T A s_k.
  Scalar curvature;
  /// Krylov-prior scaling r_{k-1}^T r_{k-1} / (s_k^T A s_k)^{1/2}; equals
  /// alpha_k (s_k^T A s_k)^{1/2}.
  Scalar psi;
  /// ||r_k|| from the recursion r_k = r_{k-1} - alpha_k A s_k.
  Scalar residual_norm;
  Scalar beta;
  /// ||b - A x_k||, NaN unless monitor_true_residual is set.
  Scalar true_residual_norm = std::numeric_limits<Scalar>::quiet_NaN();
};

template <typename Scalar>
struct KrylovTrace {
  Vector<Scalar> initial_residual;
  std::vector<KrylovStep<Scalar>> steps;
  /// Column k-1 holds the unnormalised direction s_k. Empty unless the solver
  /// was asked to keep directions.
  DenseMatrix<Scalar> directions;

  Index iterations() const noexcept { return static_cast<Index>(steps.size()); }
};

/// Result of a CG, PI or RPI run.
///
/// Sigma = factor * factor^T is the posterior covariance; the columns of the
/// factor are alpha_k s_k for the postiterations k = m+1..t.
template <typename Scalar>
struct SolveOutcome {
  /// x_m for CG and PI, the randomised x~ for RPI.
  Vector<Scalar> mean;
  /// Deterministic CG iterate x_m at the end of the mean phase.
  Vector<Scalar> cg_mean;
  /// CG iterate x_t after the last iteration performed.
  Vector<Scalar> final_iterate;
  DenseMatrix<Scalar> factor;
  Index m = 0;
  Index t = 0;
  bool converged = false;
  /// ||r_k|| for k = 0..t.
  std::vector<Scalar> residual_history;
  KrylovTrace<Scalar> trace;
  /// z_k drawn during RPI postiterations.
  std::vector<double> draws;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stream;

  Index postiterations() const noexcept { return t - m; }
};

namespace detail {

template <typename Scalar>
void orthogonalise_against(Vector<Scalar>& v, const std::vector<Vector<Scalar>>& orthonormal) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : orthonormal) v -= q.dot(v) * q;
  }
}

/// One CG recursion shared by every solver, so the mean phase of PI/RPI is
/// bit-identical to plain CG. `draw()` returns the z_k perturbation for a
/// postiteration, or nullopt for deterministic postiterations.
template <typename Scalar, typename Draw>
SolveOutcome<Scalar> run_krylov(const SpdMatrix<Scalar>& a, const Vector<Scalar>& b, const Vector<Scalar>& x0,
                                const SolverConfig& cfg, Draw&& draw) {
  cfg.validate();
  const Index d = a.dim();
  require_same_dim(d, b.size(), "solver right-hand side");
  require_same_dim(d, x0.size(), "solver initial guess");
  if (!b.allFinite() || !x0.allFinite()) throw InvalidArgument("solver: non-finite input vector");

  using std::sqrt;
  SolveOutcome<Scalar> out;
  const Scalar bnorm = b.norm();
  if (bnorm == Scalar(0)) {
    // A x = 0 has the unique solution 0 whatever x0 is.
    out.mean = out.cg_mean = out.final_iterate = Vector<Scalar>::Zero(d);
    out.factor.resize(d, 0);
    out.converged = true;
    out.residual_history = {Scalar(0)};
    out.trace.initial_residual = Vector<Scalar>::Zero(d);
    return out;
  }
  const Scalar tol1 = static_cast<Scalar>(cfg.eps1) * bnorm;
  const Scalar tol2 = static_cast<Scalar>(cfg.eps2) * bnorm;
  const Index max_iter = cfg.resolved_max_iter(d);

  Vector<Scalar> x = x0;
  Vector<Scalar> r(d);
  a.apply(x0, r);
  r = b - r;
  out.trace.initial_residual = r;
  Vector<Scalar> s = r;
  Vector<Scalar> as(d);
  Scalar rr = r.squaredNorm();
  out.residual_history.push_back(sqrt(rr));

  std::vector<Vector<Scalar>> kept;
  std::vector<Vector<Scalar>> columns;
  // A-orthonormalised copies of the directions and orthonormal residuals.
  std::vector<Vector<Scalar>> direction_basis;
  std::vector<Vector<Scalar>> a_direction_basis;
  std::vector<Vector<Scalar>> residual_basis;
  if (cfg.reorthogonalise && rr > Scalar(0)) residual_basis.push_back(r / sqrt(rr));

  Vector<Scalar> xtilde;
  bool post = false;
  auto enter_post = [&](Index k) {
    post = true;
    out.m = k;
    out.cg_mean = x;
    xtilde = x;
  };

  bool done = false;
  Index k = 0;
  if (rr == Scalar(0)) {
    enter_post(0);
    done = true;
  } else if (cfg.mean_iterations && *cfg.mean_iterations == 0) {
    enter_post(0);
    done = sqrt(rr) <= tol2;
  }
  if (done) out.converged = true;

  while (!done) {
    if (k == max_iter) break;
    ++k;
    a.apply(s, as);
    const Scalar curvature = s.dot(as);
    if (!(curvature > Scalar(0)) || !std::isfinite(static_cast<double>(curvature))) {
      throw NumericalBreakdown("solver: non-positive or non-finite s^T A s at iteration " + std::to_string(k));
    }
    const Scalar alpha = rr / curvature;
    x += alpha * s;
    r -= alpha * as;
    if (cfg.reorthogonalise) orthogonalise_against(r, residual_basis);
    const Scalar rr_next = r.squaredNorm();
    const Scalar rnorm = sqrt(rr_next);
    if (!std::isfinite(static_cast<double>(rnorm))) {
      throw NumericalBreakdown("solver: non-finite residual at iteration " + std::to_string(k));
    }
    const Scalar beta = rr_next / rr;

    KrylovStep<Scalar> step{alpha, curvature, rr / sqrt(curvature), rnorm, beta};
    if (cfg.monitor_true_residual) {
      Vector<Scalar> ax(d);
      a.apply(x, ax);
      step.true_residual_norm = (b - ax).norm();
    }
    out.trace.steps.push_back(step);
    out.residual_history.push_back(rnorm);
    if (cfg.keep_directions) kept.push_back(s);

    if (!post) {
      const bool mean_done = cfg.mean_iterations ? k == *cfg.mean_iterations : rnorm <= tol1;
      if (mean_done || rnorm == Scalar(0)) {
        enter_post(k);
        done = rnorm <= tol2;
      }
    } else {
      Vector<Scalar> column = alpha * s;
      if (const std::optional<double> z = draw()) {
        xtilde += (static_cast<Scalar>(*z) + Scalar(1)) * column;
        out.draws.push_back(*z);
      }
      columns.push_back(std::move(column));
      done = rnorm <= tol2;
    }
    // With full reorthogonalisation the d directions span R^d: nothing is left.
    if (!done && cfg.reorthogonalise && k >= d) {
      if (!post) enter_post(k);
      done = true;
    }
    if (done) {
      out.converged = true;
      break;
    }

    if (cfg.reorthogonalise) {
      const Scalar scale = sqrt(curvature);
      direction_basis.push_back(s / scale);
      a_direction_basis.push_back(as / scale);
      residual_basis.push_back(r / rnorm);
    }
    rr = rr_next;
    s = r + beta * s;
    if (cfg.reorthogonalise) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < direction_basis.size(); ++j) {
          s -= a_direction_basis[j].dot(s) * direction_basis[j];
        }
      }
    }
  }

  out.t = k;
  if (!post) enter_post(k);
  out.final_iterate = x;
  out.mean = xtilde;
  out.factor.resize(d, static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) out.factor.col(static_cast<Index>(j)) = columns[j];
  if (cfg.keep_directions) {
    out.trace.directions.resize(d, static_cast<Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) out.trace.directions.col(static_cast<Index>(j)) = kept[j];
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
using VectorArg = std::type_identity_t<Vector<Scalar>>;


/// Conjugate gradients stopped at the first k with ||r_k|| <= eps ||b||.
/// Non-convergence within max_iter (0 = 10 d) is reported through
/// `converged`, not thrown.
template <typename Scalar>
SolveOutcome<Scalar> cg_solve(const SpdMatrix<Scalar>& a, const VectorArg<Scalar>& b, const VectorArg<Scalar>& x0,
                              double eps, Index max_iter = 0, bool keep_directions = true) {
  SolverConfig cfg = SolverConfig::plain(eps);
  cfg.max_iter = max_iter;
  cfg.keep_directions = keep_directions;
  return detail::run_krylov(a, b, x0, cfg, [] { return std::optional<double>{}; });
}

/// Deterministic postiterations: mean x_m, covariance factor from the
/// postiteration directions.
template <typename Scalar>
SolveOutcome<Scalar> pi_solve(const SpdMatrix<Scalar>& a, const VectorArg<Scalar>& b, const VectorArg<Scalar>& x0,
                              const SolverConfig& cfg) {
  return detail::run_krylov(a, b, x0, cfg, [] { return std::optional<double>{}; });
}

/// Randomised postiterations: each postiteration moves the mean by
/// alpha_k (z_k + 1) s_k with z_k drawn by `noise()`.
template <typename Scalar, typename Noise>
SolveOutcome<Scalar> rpi_solve_with(const SpdMatrix<Scalar>& a, const VectorArg<Scalar>& b,
                                    const VectorArg<Scalar>& x0, const SolverConfig& cfg, Noise&& noise) {
  return detail::run_krylov(a, b, x0, cfg, [&] { return std::optional<double>{noise()}; });
}

template <typename Scalar>
SolveOutcome<Scalar> rpi_solve(const SpdMatrix<Scalar>& a, const VectorArg<Scalar>& b, const VectorArg<Scalar>& x0,
                               const SolverConfig& cfg, RngStream& rng) {
  auto out = rpi_solve_with(a, b, x0, cfg, [&] { return rng.normal(); });
  out.seed = rng.seed();
  out.stream = rng.stream();
  return out;
}

}  // namespace rpcg
