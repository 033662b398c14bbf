#pragma once

#include <filesystem>

#include "rpcg/core/spd_matrix.hpp"

namespace rpcg {

// Plain-text formats.
//
// Matrix: header line "d nnz", then nnz lines "i j value" with 0-based indices.
// Every stored entry is listed (both triangles). Vector: one value per line.

void save_matrix(const std::filesystem::path& path, const SpdMatrix<double>& a);

/// Loads into sparse storage, or dense storage when more than a quarter of the
/// entries are present.
SpdMatrix<double> load_matrix(const std::filesystem::path& path);

void save_vector(const std::filesystem::path& path, const VectorXd& v);
VectorXd load_vector(const std::filesystem::path& path);

}  // namespace rpcg
