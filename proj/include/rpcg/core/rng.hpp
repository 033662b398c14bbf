#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "rpcg/core/types.hpp"

namespace rpcg {

/// Seeded random stream. The pair (seed, stream) fully determines the draw
/// sequence; distinct stream indices are seeded through std::seed_seq so that
/// parallel work can be partitioned by stream index.
///
/// Uniform, normal and exponential variates are produced from raw 64-bit
/// engine output with fixed transforms (53-bit mantissa, Box-Muller, -ln U),
/// so sequences do not depend on the standard library's distribution classes.
class RngStream {
 public:
  static constexpr std::string_view algorithm = "mt19937_64+seed_seq/box-muller";

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Exp(1) by inversion.
  double exponential();
  std::uint64_t next_u64() { return engine_(); }

  template <typename Scalar = double>
  Vector<Scalar> normal_vector(Index n) {
    Vector<Scalar> v(n);
    for (Index i = 0; i < n; ++i) v[i] = static_cast<Scalar>(normal());
    return v;
  }

  template <typename Scalar = double>
  DenseMatrix<Scalar> normal_matrix(Index rows, Index cols) {
    DenseMatrix<Scalar> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = static_cast<Scalar>(normal());
    return m;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

/// Mixes a parent seed and an index into a new seed (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace rpcg
