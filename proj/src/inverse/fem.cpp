#include "rpcg/inverse/fem.hpp"

#include <cmath>
#include <vector>

namespace rpcg::inverse {

double conductivity(Point z, double theta) {
  const bool inside = z.z1 >= inclusion_lo && z.z1 <= inclusion_hi && z.z2 >= inclusion_lo && z.z2 <= inclusion_hi;
  return inside ? 1.0 + std::exp(theta) : 1.0;
}

double boundary_value(Point z) { return (1.0 - z.z1) * (1.0 - z.z2) + z.z1 * z.z2; }

LinearSystem assemble(const Mesh& mesh, double theta) {
  const auto& nodes = mesh.nodes();
  const Index d = mesh.free_count();
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(mesh.triangles().size() * 9);
  VectorXd rhs = VectorXd::Zero(d);

  for (const auto& tri : mesh.triangles()) {
    const Point& p0 = nodes[static_cast<std::size_t>(tri[0])];
    const Point& p1 = nodes[static_cast<std::size_t>(tri[1])];
    const Point& p2 = nodes[static_cast<std::size_t>(tri[2])];
    const Point centroid{(p0.z1 + p1.z1 + p2.z1) / 3.0, (p0.z2 + p1.z2 + p2.z2) / 3.0};
    const double k = conductivity(centroid, theta);

    // Gradients of the barycentric basis, scaled by 2|T|.
    const std::array<double, 3> gx{p1.z2 - p2.z2, p2.z2 - p0.z2, p0.z2 - p1.z2};
    const std::array<double, 3> gy{p2.z1 - p1.z1, p0.z1 - p2.z1, p1.z1 - p0.z1};
    const double twice_area = (p1.z1 - p0.z1) * (p2.z2 - p0.z2) - (p2.z1 - p0.z1) * (p1.z2 - p0.z2);
    const double scale = k / (2.0 * twice_area);

    bool touches_boundary = false;
    for (Index node : tri) touches_boundary = touches_boundary || mesh.is_dirichlet(node);
    if (touches_boundary && k != 1.0) {
      throw InvalidArgument("assemble: inclusion touches the Dirichlet boundary; the lifted load would depend on theta");
    }

    for (int a = 0; a < 3; ++a) {
      const Index row = mesh.free_index(tri[static_cast<std::size_t>(a)]);
      if (row < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const double value = scale * (gx[a] * gx[b] + gy[a] * gy[b]);
        const Index node_b = tri[static_cast<std::size_t>(b)];
        const Index col = mesh.free_index(node_b);
        if (col >= 0) {
          triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), value);
        } else {
          rhs[row] -= value * boundary_value(nodes[static_cast<std::size_t>(node_b)]);
        }
      }
    }
  }
  SparseMatrix<double> stiffness(d, d);
  stiffness.setFromTriplets(triplets.begin(), triplets.end());
  stiffness.prune(0.0);
  return {SpdMatrix<double>::from_sparse(std::move(stiffness)), std::move(rhs)};
}

VectorXd full_solution(const Mesh& mesh, const VectorXd& free_values) {
  require_same_dim(mesh.free_count(), free_values.size(), "full_solution");
  VectorXd u(mesh.node_count());
  for (Index node = 0; node < mesh.node_count(); ++node) {
    const Index f = mesh.free_index(node);
    u[node] = f >= 0 ? free_values[f] : boundary_value(mesh.nodes()[static_cast<std::size_t>(node)]);
  }
  return u;
}

}  // namespace rpcg::inverse
