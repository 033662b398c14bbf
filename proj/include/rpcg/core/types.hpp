#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace rpcg {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Compressed sparse rows.
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>;

using VectorXd = Vector<double>;
using MatrixXd = DenseMatrix<double>;

}  // namespace rpcg
