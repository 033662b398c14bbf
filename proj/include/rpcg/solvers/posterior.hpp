#pragma once

#include <Eigen/QR>

#include "rpcg/solvers/krylov.hpp"

namespace rpcg {

/// Relative threshold on |R_ii| in the QR of the column-equilibrated factor
/// below which the factor counts as rank deficient.
inline constexpr double factor_rank_tolerance = 1e-10;

/// L^+ (x - mean): the minimum-norm least-squares solution c of L c = x - mean.
///
/// Columns are scaled to unit norm before a column-pivoted QR, so the rank
/// test sees directions rather than the (geometrically decaying) step sizes.
/// Sigma^+ is never formed.
template <typename Scalar, typename Derived>
Vector<Scalar> whitened_error(const Eigen::MatrixBase<Derived>& x_true, const SolveOutcome<Scalar>& outcome) {
  require_same_dim(outcome.mean.size(), x_true.size(), "whitened_error");
  const auto& factor = outcome.factor;
  const Index cols = factor.cols();
  if (cols == 0) return Vector<Scalar>(0);

  const Vector<Scalar> norms = factor.colwise().norm().transpose();
  if (!(norms.minCoeff() > Scalar(0))) throw RankDeficient("whitened_error: factor has a zero column");
  const DenseMatrix<Scalar> scaled = factor * norms.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<DenseMatrix<Scalar>> qr(scaled);
  qr.setThreshold(static_cast<Scalar>(factor_rank_tolerance));
  if (qr.rank() < cols) {
    throw RankDeficient("whitened_error: factor has numerical rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(cols) + " columns");
  }
  const Vector<Scalar> error = x_true - outcome.mean;
  const Vector<Scalar> scaled_coefficients = qr.solve(error);
  return scaled_coefficients.cwiseQuotient(norms);
}

/// Z = (mean - x)^T Sigma^+ (mean - x) = ||L^+ (x - mean)||^2.
template <typename Scalar, typename Derived>
Scalar z_statistic(const Eigen::MatrixBase<Derived>& x_true, const SolveOutcome<Scalar>& outcome) {
  return whitened_error(x_true, outcome).squaredNorm();
}

/// w^T L L^T w, computed as ||L^T w||^2.
template <typename Scalar, typename Derived>
Scalar posterior_variance_of(const Eigen::MatrixBase<Derived>& w, const SolveOutcome<Scalar>& outcome) {
  require_same_dim(outcome.factor.rows(), w.size(), "posterior_variance_of");
  if (outcome.factor.cols() == 0) return Scalar(0);
  return (outcome.factor.transpose() * w).squaredNorm();
}

/// Dense L L^T; intended for small problems and tests.
template <typename Scalar>
DenseMatrix<Scalar> posterior_covariance(const SolveOutcome<Scalar>& outcome) {
  return outcome.factor * outcome.factor.transpose();
}

}  // namespace rpcg
