#include "rpcg/inverse/mesh.hpp"

#include <cmath>
#include <string>

#include "rpcg/core/errors.hpp"

namespace rpcg::inverse {

Mesh::Mesh(int n) : n_(n) {
  if (n < 4 || n % 4 != 0) throw InvalidArgument("Mesh: subdivisions must be a positive multiple of 4, got " + std::to_string(n));
  const double h = 1.0 / n;
  nodes_.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  free_index_.assign(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      nodes_.push_back({i * h, j * h});
      if (j != 0 && j != n) {
        free_index_[static_cast<std::size_t>(node(i, j))] = static_cast<Index>(free_nodes_.size());
        free_nodes_.push_back(node(i, j));
      }
    }
  }
  triangles_.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Index sw = node(i, j);
      const Index se = node(i + 1, j);
      const Index nw = node(i, j + 1);
      const Index ne = node(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        triangles_.push_back({sw, se, ne});
        triangles_.push_back({sw, ne, nw});
      } else {
        triangles_.push_back({sw, se, nw});
        triangles_.push_back({se, ne, nw});
      }
    }
  }
}

Index Mesh::node_at(Point p) const {
  const double fi = p.z1 * n_;
  const double fj = p.z2 * n_;
  const double i = std::round(fi);
  const double j = std::round(fj);
  if (std::abs(fi - i) > 1e-9 || std::abs(fj - j) > 1e-9 || i < 0 || j < 0 || i > n_ || j > n_) {
    throw InvalidArgument("Mesh::node_at: point is not a mesh node");
  }
  return node(static_cast<int>(i), static_cast<int>(j));
}

}  // namespace rpcg::inverse
