#include "rpcg/inverse/likelihood.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

namespace rpcg::inverse {

double gaussian_log_density(const VectorXd& y, const VectorXd& mean, const MatrixXd& factor, double sigma) {
  require_same_dim(y.size(), mean.size(), "gaussian_log_density mean");
  if (factor.cols() > 0) require_same_dim(y.size(), factor.rows(), "gaussian_log_density factor");
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_log_density: sigma must be positive");
  const Index n = y.size();
  MatrixXd covariance = sigma * sigma * MatrixXd::Identity(n, n);
  if (factor.cols() > 0) covariance.noalias() += factor * factor.transpose();
  Eigen::LLT<MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("gaussian_log_density: covariance is not positive definite");
  const VectorXd whitened = llt.matrixL().solve(y - mean);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + log_det + whitened.squaredNorm());
}

double pn_log_likelihood(const VectorXd& y, const SolveOutcome<double>& outcome, double sigma,
                         const ObservationOperator& w) {
  return gaussian_log_density(y, w.apply(outcome.mean), w.apply(outcome.factor), sigma);
}

}  // namespace rpcg::inverse
