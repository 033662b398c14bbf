#pragma once

#include <Eigen/Cholesky>

#include "rpcg/core/errors.hpp"
#include "rpcg/core/types.hpp"

namespace rpcg {

template <typename Scalar>
struct DensePosterior {
  Vector<Scalar> mean;
  DenseMatrix<Scalar> covariance;
};

/// Gaussian conditioning of N(x0, Sigma0) on S^T A x = S^T b, in dense
/// arithmetic:
///
///   x_m     = x0 + Sigma0 A^T S Lambda^{-1} S^T (b - A x0)
///   Sigma_m = Sigma0 - Sigma0 A^T S Lambda^{-1} S^T A Sigma0,
///   Lambda  = S^T A Sigma0 A^T S.
///
/// Validation-only: cost is O(d^3).
template <typename Scalar>
DensePosterior<Scalar> bayescg_dense(const DenseMatrix<Scalar>& a, const Vector<Scalar>& b,
                                     const Vector<Scalar>& x0, const DenseMatrix<Scalar>& prior_covariance,
                                     const DenseMatrix<Scalar>& directions) {
  const Index d = a.rows();
  require_same_dim(d, a.cols(), "bayescg_dense: A columns");
  require_same_dim(d, b.size(), "bayescg_dense: b");
  require_same_dim(d, x0.size(), "bayescg_dense: x0");
  require_same_dim(d, prior_covariance.rows(), "bayescg_dense: Sigma0 rows");
  require_same_dim(d, prior_covariance.cols(), "bayescg_dense: Sigma0 columns");
  require_same_dim(d, directions.rows(), "bayescg_dense: S rows");

  if (directions.cols() == 0) return {x0, prior_covariance};

  const DenseMatrix<Scalar> cross = prior_covariance * a.transpose() * directions;  // Sigma0 A^T S
  const DenseMatrix<Scalar> information = directions.transpose() * a * cross;       // Lambda
  const DenseMatrix<Scalar> sym_info = Scalar(0.5) * (information + information.transpose());
  Eigen::LLT<DenseMatrix<Scalar>> llt(sym_info);
  if (llt.info() != Eigen::Success || !(llt.rcond() > Scalar(1e-14))) {
    throw SingularInformation("bayescg_dense: S^T A Sigma0 A^T S is singular; directions must have full rank");
  }
  Vector<Scalar> mean = x0 + cross * llt.solve(directions.transpose() * (b - a * x0));
  DenseMatrix<Scalar> covariance = prior_covariance - cross * llt.solve(cross.transpose());
  covariance = (Scalar(0.5) * (covariance + covariance.transpose())).eval();
  return {std::move(mean), std::move(covariance)};
}

/// The same posterior under the inverse prior Sigma0 = A^{-1}:
///
///   x_m     = x0 + S (S^T A S)^{-1} S^T (b - A x0)
///   Sigma_m = A^{-1} - S (S^T A S)^{-1} S^T.
template <typename Scalar>
DensePosterior<Scalar> inverse_prior_posterior_dense(const DenseMatrix<Scalar>& a, const Vector<Scalar>& b,
                                                     const Vector<Scalar>& x0,
                                                     const DenseMatrix<Scalar>& directions) {
  const Index d = a.rows();
  Eigen::LLT<DenseMatrix<Scalar>> a_llt(a);
  if (a_llt.info() != Eigen::Success) throw NotPositiveDefinite("inverse_prior_posterior_dense: A is not SPD");
  DenseMatrix<Scalar> a_inv = a_llt.solve(DenseMatrix<Scalar>::Identity(d, d));
  a_inv = (Scalar(0.5) * (a_inv + a_inv.transpose())).eval();
  if (directions.cols() == 0) return {x0, a_inv};

  const DenseMatrix<Scalar> curvature = directions.transpose() * a * directions;
  Eigen::LLT<DenseMatrix<Scalar>> llt(Scalar(0.5) * (curvature + curvature.transpose()));
  if (llt.info() != Eigen::Success || !(llt.rcond() > Scalar(1e-14))) {
    throw SingularInformation("inverse_prior_posterior_dense: S^T A S is singular");
  }
  Vector<Scalar> mean = x0 + directions * llt.solve(directions.transpose() * (b - a * x0));
  DenseMatrix<Scalar> covariance = a_inv - directions * llt.solve(directions.transpose());
  covariance = (Scalar(0.5) * (covariance + covariance.transpose())).eval();
  return {std::move(mean), std::move(covariance)};
}

}  // namespace rpcg
