#pragma once

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <memory>
#include <string>
#include <variant>

#include "rpcg/core/errors.hpp"
#include "rpcg/core/rng.hpp"
#include "rpcg/core/types.hpp"

namespace rpcg {

/// Symmetric positive-definite operator with either dense or CSR storage.
///
/// Construction checks squareness and symmetry (|A_ij - A_ji| <= 1e-12 max|A|);
/// positive-definiteness is checked lazily by Cholesky. Instances are
/// immutable and can be shared across threads.
template <typename Scalar>
class SpdMatrix {
 public:
  using Dense = DenseMatrix<Scalar>;
  using Sparse = SparseMatrix<Scalar>;

  static constexpr double symmetry_tolerance = 1e-12;

  static SpdMatrix from_dense(Dense a) {
    check_square(a.rows(), a.cols());
    const Scalar scale = a.cwiseAbs().maxCoeff();
    if (!a.allFinite()) throw InvalidArgument("SpdMatrix: non-finite entry");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(symmetry_tolerance) * scale) {
      throw InvalidArgument("SpdMatrix: dense matrix is not symmetric");
    }
    return SpdMatrix(std::move(a));
  }

  static SpdMatrix from_sparse(Sparse a) {
    check_square(a.rows(), a.cols());
    a.makeCompressed();
    using std::abs;
    Scalar scale(0);
    for (Index k = 0; k < a.nonZeros(); ++k) {
      const Scalar v = a.valuePtr()[k];
      if (!std::isfinite(static_cast<double>(v))) throw InvalidArgument("SpdMatrix: non-finite entry");
      scale = std::max<Scalar>(scale, abs(v));
    }
    const Sparse asym = a - Sparse(a.transpose());
    for (Index k = 0; k < asym.nonZeros(); ++k) {
      if (abs(asym.valuePtr()[k]) > Scalar(symmetry_tolerance) * scale) {
        throw InvalidArgument("SpdMatrix: sparse matrix is not symmetric");
      }
    }
    return SpdMatrix(std::move(a));
  }

  static SpdMatrix identity(Index d) {
    check_square(d, d);
    return SpdMatrix(Dense(Dense::Identity(d, d)));
  }

  static SpdMatrix diagonal(const Vector<Scalar>& entries) {
    return from_dense(Dense(entries.asDiagonal()));
  }

  Index dim() const noexcept {
    return std::visit([](const auto& m) { return static_cast<Index>(m.rows()); }, storage_);
  }

  bool is_sparse() const noexcept { return std::holds_alternative<Sparse>(storage_); }

  const Dense& dense() const { return std::get<Dense>(storage_); }
  const Sparse& sparse() const { return std::get<Sparse>(storage_); }

  Dense to_dense() const {
    if (is_sparse()) return Dense(sparse());
    return dense();
  }

  Sparse to_sparse() const {
    if (is_sparse()) return sparse();
    return dense().sparseView();
  }

  /// out = A v. `out` must not alias `v`.
  template <typename In, typename Out>
  void apply(const Eigen::MatrixBase<In>& v, Eigen::MatrixBase<Out>& out) const {
    std::visit([&](const auto& m) { out.derived().noalias() = m * v; }, storage_);
  }

 private:
  explicit SpdMatrix(Dense a) : storage_(std::move(a)) {}
  explicit SpdMatrix(Sparse a) : storage_(std::move(a)) {}

  static void check_square(Index rows, Index cols) {
    if (rows < 1 || rows != cols) {
      throw InvalidArgument("SpdMatrix: expected a non-empty square matrix, got " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  std::variant<Dense, Sparse> storage_;
};

template <typename Scalar, typename Derived>
Vector<Scalar> matvec(const SpdMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& v) {
  require_same_dim(a.dim(), v.size(), "matvec");
  Vector<Scalar> out(a.dim());
  a.apply(v, out);
  return out;
}

/// Cholesky factorisation A = C C^T of an SpdMatrix: dense LLT for dense
/// storage, simplicial LLT with AMD ordering for sparse storage.
template <typename Scalar>
class Cholesky {
 public:
  using Dense = DenseMatrix<Scalar>;
  using Sparse = SparseMatrix<Scalar>;
  using SparseColumn = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;
  using SparseFactor = Eigen::SimplicialLLT<SparseColumn, Eigen::Lower, Eigen::AMDOrdering<int>>;

  explicit Cholesky(const SpdMatrix<Scalar>& a) : dim_(a.dim()) {
    if (a.is_sparse()) {
      auto factor = std::make_shared<SparseFactor>();
      factor->compute(SparseColumn(a.sparse()));
      if (factor->info() != Eigen::Success) {
        throw NotPositiveDefinite("Cholesky: sparse factorisation hit a non-positive pivot");
      }
      factor_ = std::move(factor);
    } else {
      Eigen::LLT<Dense> llt(a.dense());
      if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("Cholesky: dense factorisation hit a non-positive pivot");
      }
      factor_ = std::move(llt);
    }
  }

  Index dim() const noexcept { return dim_; }

  template <typename Derived>
  Vector<Scalar> solve(const Eigen::MatrixBase<Derived>& b) const {
    require_same_dim(dim_, b.size(), "Cholesky::solve");
    return std::visit(
        [&](const auto& f) -> Vector<Scalar> {
          if constexpr (std::is_same_v<std::decay_t<decltype(f)>, Eigen::LLT<Dense>>) {
            return f.solve(b);
          } else {
            return f->solve(Vector<Scalar>(b));
          }
        },
        factor_);
  }

  /// Draws x ~ N(0, A^{-1}) as x = C^{-T} xi with xi standard normal.
  Vector<Scalar> sample_inverse_covariance(RngStream& rng) const {
    const Vector<Scalar> xi = rng.normal_vector<Scalar>(dim_);
    return std::visit(
        [&](const auto& f) -> Vector<Scalar> {
          if constexpr (std::is_same_v<std::decay_t<decltype(f)>, Eigen::LLT<Dense>>) {
            return f.matrixU().solve(xi);
          } else {
            // P A P^{-1} = L L^T, so x = P^{-1} L^{-T} xi.
            const Vector<Scalar> y = f->matrixU().solve(xi);
            return f->permutationPinv() * y;
          }
        },
        factor_);
  }

 private:
  Index dim_;
  std::variant<Eigen::LLT<Dense>, std::shared_ptr<const SparseFactor>> factor_;
};

/// Exact solve of A x = b by Cholesky.
template <typename Scalar, typename Derived>
Vector<Scalar> direct_solve(const SpdMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& b) {
  require_same_dim(a.dim(), b.size(), "direct_solve");
  return Cholesky<Scalar>(a).solve(b);
}

}  // namespace rpcg
