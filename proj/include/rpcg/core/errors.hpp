#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace rpcg {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A Cholesky pivot was non-positive.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// A non-finite or non-positive curvature appeared inside an iteration.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

/// The information matrix S^T A Sigma0 A^T S could not be inverted.
class SingularInformation : public Error {
 public:
  using Error::Error;
};

/// A low-rank covariance factor had (numerically) collinear columns.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline void require_same_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(expected) +
                            ", got " + std::to_string(got));
  }
}

}  // namespace rpcg
