#pragma once

#include <Eigen/QR>

#include "rpcg/core/errors.hpp"
#include "rpcg/core/rng.hpp"
#include "rpcg/core/spd_matrix.hpp"

namespace rpcg {

/// Haar-distributed orthogonal matrix: QR of an i.i.d. standard-normal matrix
/// with the columns of Q rescaled by sign(R_ii).
template <typename Scalar = double>
DenseMatrix<Scalar> sample_haar_orthogonal(Index d, RngStream& rng) {
  if (d < 1) throw InvalidArgument("sample_haar_orthogonal: d must be positive");
  const DenseMatrix<Scalar> gaussian = rng.normal_matrix<Scalar>(d, d);
  Eigen::HouseholderQR<DenseMatrix<Scalar>> qr(gaussian);
  DenseMatrix<Scalar> q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < Scalar(0)) q.col(j) = -q.col(j);
  }
  return q;
}

template <typename Scalar>
struct SpectralSample {
  SpdMatrix<Scalar> matrix;
  Vector<Scalar> eigenvalues;
  DenseMatrix<Scalar> eigenvectors;
};

/// A = W D W^T with W Haar-orthogonal and D_ii ~ Exp(1), keeping W and D.
template <typename Scalar = double>
SpectralSample<Scalar> sample_spd_exp_spectral(Index d, RngStream& rng) {
  DenseMatrix<Scalar> w = sample_haar_orthogonal<Scalar>(d, rng);
  Vector<Scalar> lambda(d);
  for (Index i = 0; i < d; ++i) lambda[i] = static_cast<Scalar>(rng.exponential());
  DenseMatrix<Scalar> a = w * lambda.asDiagonal() * w.transpose();
  // Symmetrise exactly; the product is symmetric only up to rounding.
  a = (Scalar(0.5) * (a + a.transpose())).eval();
  return {SpdMatrix<Scalar>::from_dense(std::move(a)), std::move(lambda), std::move(w)};
}

template <typename Scalar = double>
SpdMatrix<Scalar> sample_spd_exp(Index d, RngStream& rng) {
  return sample_spd_exp_spectral<Scalar>(d, rng).matrix;
}

}  // namespace rpcg
