#include "rpcg/inverse/model.hpp"

#include <string>

namespace rpcg::inverse {

ObservationOperator::ObservationOperator(std::vector<Index> free_indices, Index dim)
    : indices_(std::move(free_indices)), dim_(dim) {
  for (Index i : indices_) {
    if (i < 0 || i >= dim_) throw InvalidArgument("ObservationOperator: index " + std::to_string(i) + " out of range");
  }
}

VectorXd ObservationOperator::apply(const VectorXd& x) const {
  require_same_dim(dim_, x.size(), "ObservationOperator::apply");
  VectorXd out(rows());
  for (Index r = 0; r < rows(); ++r) out[r] = x[indices_[static_cast<std::size_t>(r)]];
  return out;
}

MatrixXd ObservationOperator::apply(const MatrixXd& m) const {
  require_same_dim(dim_, m.rows(), "ObservationOperator::apply");
  MatrixXd out(rows(), m.cols());
  for (Index r = 0; r < rows(); ++r) out.row(r) = m.row(indices_[static_cast<std::size_t>(r)]);
  return out;
}

MatrixXd ObservationOperator::dense() const {
  MatrixXd w = MatrixXd::Zero(rows(), dim_);
  for (Index r = 0; r < rows(); ++r) w(r, indices_[static_cast<std::size_t>(r)]) = 1.0;
  return w;
}

std::vector<Point> observation_points() {
  return {{inclusion_lo, inclusion_lo}, {inclusion_hi, inclusion_lo}, {inclusion_lo, inclusion_hi}, {inclusion_hi, inclusion_hi}};
}

ObservationOperator observe(const Mesh& mesh, const std::vector<Point>& points) {
  std::vector<Index> indices;
  for (const Point& p : points) {
    const Index f = mesh.free_index(mesh.node_at(p));
    if (f < 0) throw InvalidArgument("observe: observation point lies on the Dirichlet boundary");
    indices.push_back(f);
  }
  return ObservationOperator(std::move(indices), mesh.free_count());
}

ForwardModel ForwardModel::make(int n, double sigma, VectorXd data) {
  if (!(sigma > 0.0)) throw InvalidArgument("ForwardModel: sigma must be positive");
  Mesh mesh(n);
  ObservationOperator w = observe(mesh, observation_points());
  require_same_dim(w.rows(), data.size(), "ForwardModel data");
  return {std::move(mesh), std::move(w), sigma, std::move(data)};
}

VectorXd exact_observables(const Mesh& mesh, const ObservationOperator& w, double theta) {
  const LinearSystem system = assemble(mesh, theta);
  return w.apply(direct_solve(system.matrix, system.rhs));
}

VectorXd generate_data(int n, double theta, double sigma, RngStream& rng) {
  if (!(sigma >= 0.0)) throw InvalidArgument("generate_data: sigma must be non-negative");
  const Mesh mesh(n);
  VectorXd y = exact_observables(mesh, observe(mesh, observation_points()), theta);
  if (sigma > 0.0) y += sigma * rng.normal_vector(y.size());
  return y;
}

}  // namespace rpcg::inverse
