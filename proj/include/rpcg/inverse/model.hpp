#pragma once

#include <vector>

#include "rpcg/core/rng.hpp"
#include "rpcg/inverse/fem.hpp"

namespace rpcg::inverse {

/// Selector w (N x d, 0/1 entries, one 1 per row) picking observed unknowns.
class ObservationOperator {
 public:
  ObservationOperator(std::vector<Index> free_indices, Index dim);

  Index rows() const noexcept { return static_cast<Index>(indices_.size()); }
  Index cols() const noexcept { return dim_; }
  const std::vector<Index>& indices() const noexcept { return indices_; }

  VectorXd apply(const VectorXd& x) const;
  /// Row selection of a d x k matrix.
  MatrixXd apply(const MatrixXd& m) const;
  MatrixXd dense() const;

 private:
  std::vector<Index> indices_;
  Index dim_;
};

/// The four corners of the inclusion.
std::vector<Point> observation_points();

ObservationOperator observe(const Mesh& mesh, const std::vector<Point>& points);

struct ForwardModel {
  Mesh mesh;
  ObservationOperator observation;
  double sigma;
  VectorXd data;

  /// Model on the n x n mesh observing the inclusion corners.
  static ForwardModel make(int n, double sigma, VectorXd data);
};

/// Noise-free observables w x_theta from a Cholesky solve on `mesh`.
VectorXd exact_observables(const Mesh& mesh, const ObservationOperator& w, double theta);

/// y = w x_theta + sigma xi on an n x n mesh, solved exactly.
VectorXd generate_data(int n, double theta, double sigma, RngStream& rng);

}  // namespace rpcg::inverse
