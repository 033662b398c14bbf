#pragma once

#include "rpcg/inverse/model.hpp"
#include "rpcg/solvers/krylov.hpp"

namespace rpcg::inverse {

/// log N(y; mean, sigma^2 I + F F^T) for an N x k factor F, via a dense
/// N x N Cholesky factorisation.
double gaussian_log_density(const VectorXd& y, const VectorXd& mean, const MatrixXd& factor, double sigma);

/// Solver-inflated likelihood log N(y; w mean, sigma^2 I + (w L)(w L)^T).
/// With an empty factor this is the plug-in likelihood N(y; w x, sigma^2 I).
double pn_log_likelihood(const VectorXd& y, const SolveOutcome<double>& outcome, double sigma,
                         const ObservationOperator& w);

}  // namespace rpcg::inverse
