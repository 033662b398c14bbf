#include "rpcg/inverse/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rpcg/calibration/sweep.hpp"
#include "rpcg/core/errors.hpp"

namespace rpcg::inverse {

namespace {
constexpr std::size_t min_samples = 10;
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw InvalidArgument("silverman_bandwidth: need at least two samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const std::vector<double> copy(samples.begin(), samples.end());
  const double iqr = quantile(copy, 0.75) - quantile(copy, 0.25);
  double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) throw InvalidArgument("silverman_bandwidth: samples have zero spread");
  return 0.9 * spread * std::pow(n, -0.2);
}

DensityCurve kde(std::span<const double> samples, std::optional<double> bandwidth, Index points) {
  if (samples.size() < min_samples) throw InvalidArgument("kde: need at least 10 samples");
  if (points < 2) throw InvalidArgument("kde: need at least two grid points");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  if (!(h > 0.0)) throw InvalidArgument("kde: bandwidth must be positive");

  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 3.0 * h;
  const double hi = *hi_it + 3.0 * h;
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));

  DensityCurve curve;
  curve.bandwidth = h;
  curve.grid.resize(static_cast<std::size_t>(points));
  curve.density.resize(static_cast<std::size_t>(points));
  for (Index g = 0; g < points; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(points - 1);
    double sum = 0.0;
    for (double s : samples) {
      const double u = (x - s) / h;
      sum += std::exp(-0.5 * u * u);
    }
    curve.grid[static_cast<std::size_t>(g)] = x;
    curve.density[static_cast<std::size_t>(g)] = norm * sum;
  }
  return curve;
}

}  // namespace rpcg::inverse
