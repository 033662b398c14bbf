#pragma once

#include <array>
#include <vector>

#include "rpcg/core/types.hpp"

namespace rpcg::inverse {

struct Point {
  double z1;
  double z2;
};

/// Criss-cross triangulation of the unit square: n x n cells, each split into
/// two right triangles, with the diagonal alternating between cells (the
/// (i, j)-(i+1, j+1) diagonal when i + j is even). Nodes on the bottom
/// and top edges (z2 = 0, 1) carry Dirichlet data; all other nodes are free.
class Mesh {
 public:
  /// Requires n >= 4 and n divisible by 4, so the corners of [0.25, 0.75]^2
  /// are nodes.
  explicit Mesh(int n);

  int subdivisions() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / n_; }
  Index node_count() const noexcept { return static_cast<Index>(nodes_.size()); }
  /// Number of free nodes, (n+1)^2 - 2(n+1).
  Index free_count() const noexcept { return static_cast<Index>(free_nodes_.size()); }

  const std::vector<Point>& nodes() const noexcept { return nodes_; }
  const std::vector<std::array<Index, 3>>& triangles() const noexcept { return triangles_; }
  const std::vector<Index>& free_nodes() const noexcept { return free_nodes_; }

  /// Node index of grid point (i, j), i along z1, j along z2.
  Index node(int i, int j) const noexcept { return static_cast<Index>(j) * (n_ + 1) + i; }
  bool is_dirichlet(Index node) const noexcept { return free_index_[static_cast<std::size_t>(node)] < 0; }
  /// Position of a node among the unknowns, or -1 on the Dirichlet boundary.
  Index free_index(Index node) const noexcept { return free_index_[static_cast<std::size_t>(node)]; }

  /// Node at the given coordinates; throws if the point is not a mesh node.
  Index node_at(Point p) const;

 private:
  int n_;
  std::vector<Point> nodes_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<Index> free_nodes_;
  std::vector<Index> free_index_;
};

}  // namespace rpcg::inverse
