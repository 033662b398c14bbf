#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rpcg/core/types.hpp"

namespace rpcg::inverse {

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// Silverman's rule of thumb, 0.9 min(sd, IQR / 1.34) n^{-1/5}.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian-kernel density estimate on `points` grid values spanning
/// [min - 3h, max + 3h]. Uses Silverman's bandwidth when none is given.
/// Needs at least 10 samples.
DensityCurve kde(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt, Index points = 512);

}  // namespace rpcg::inverse
