#pragma once

#include "rpcg/core/spd_matrix.hpp"
#include "rpcg/inverse/mesh.hpp"

namespace rpcg::inverse {

/// Low-permeability inclusion [0.25, 0.75]^2.
inline constexpr double inclusion_lo = 0.25;
inline constexpr double inclusion_hi = 0.75;

/// k(z; theta) = 1 + 1_{inclusion}(z) exp(theta).
double conductivity(Point z, double theta);

/// Dirichlet data b(z) = (1 - z1)(1 - z2) + z1 z2 on the top and bottom edges.
double boundary_value(Point z);

struct LinearSystem {
  SpdMatrix<double> matrix;
  VectorXd rhs;
};

/// P1 finite elements for -div(k grad u) = 0 with k evaluated at triangle
/// centroids. Dirichlet nodes are eliminated and their data lifted into the
/// right-hand side; the left and right edges are natural (zero flux).
///
/// Throws if an element touching the Dirichlet boundary lies in the
/// inclusion, since the right-hand side would then depend on theta.
LinearSystem assemble(const Mesh& mesh, double theta);

/// Nodal values on the whole mesh from the free-node solution.
VectorXd full_solution(const Mesh& mesh, const VectorXd& free_values);

}  // namespace rpcg::inverse
