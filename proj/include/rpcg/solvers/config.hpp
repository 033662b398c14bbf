#pragma once

#include <optional>
#include <string>

#include "rpcg/core/errors.hpp"
#include "rpcg/core/types.hpp"

namespace rpcg {

/// Stopping rules and switches shared by the CG, PI and RPI solvers.
///
/// The mean phase ends at the first iteration m with ||r_m|| <= eps1 ||b||
/// (or at m = mean_iterations when that is set); postiterations then run until
/// ||r_t|| <= eps2 ||b||. With reorthogonalise on, the run also stops once the
/// Krylov space is exhausted (t = d), which is how "full postiterations" are
/// requested.
struct SolverConfig {
  double eps1 = 1e-1;
  double eps2 = 1e-2;
  /// Iteration cap; 0 means 10 d.
  Index max_iter = 0;
  /// Full Gram-Schmidt (two passes) of each new direction against the stored
  /// directions in the A-inner product, and of each residual against the
  /// previous residuals.
  bool reorthogonalise = false;
  /// Keep every direction s_k in the trace, not only the postiteration ones.
  bool keep_directions = false;
  /// Recompute ||b - A x_k|| each iteration for drift monitoring.
  bool monitor_true_residual = false;
  /// Fix the length of the mean phase instead of using eps1. Zero makes every
  /// iteration a postiteration (mean x0).
  std::optional<Index> mean_iterations;

  static SolverConfig plain(double eps) {
    SolverConfig c;
    c.eps1 = eps;
    c.eps2 = eps;
    return c;
  }

  static SolverConfig with_delta(double eps1, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("SolverConfig: delta must lie in (0, 1)");
    SolverConfig c;
    c.eps1 = eps1;
    c.eps2 = delta * eps1;
    return c;
  }

  /// Postiterations until the Krylov space is exhausted, with m iterations in
  /// the mean phase.
  static SolverConfig full_postiterations(Index m) {
    SolverConfig c;
    c.eps1 = 1.0;
    c.eps2 = 1e-300;
    c.reorthogonalise = true;
    c.mean_iterations = m;
    return c;
  }

  Index resolved_max_iter(Index d) const { return max_iter > 0 ? max_iter : 10 * d; }

  void validate() const {
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw InvalidArgument("SolverConfig: tolerances must be positive");
    if (eps2 > eps1) {
      throw InvalidArgument("SolverConfig: eps2 (" + std::to_string(eps2) + ") exceeds eps1 (" +
                            std::to_string(eps1) + ")");
    }
    if (max_iter < 0) throw InvalidArgument("SolverConfig: max_iter must be >= 1 (or 0 for default)");
    if (mean_iterations && *mean_iterations < 0) {
      throw InvalidArgument("SolverConfig: mean_iterations must be non-negative");
    }
  }
};

}  // namespace rpcg
