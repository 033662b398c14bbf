#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rpcg/core/errors.hpp"

namespace rpcg {

/// Asymptotic Kolmogorov quantile at the 1% level.
inline constexpr double ks_coefficient_1pct = 1.628;

inline double ks_critical_value_1pct(std::size_t n) { return ks_coefficient_1pct / std::sqrt(static_cast<double>(n)); }

/// sup |F_n - F| for a continuous reference CDF F, evaluated exactly over the
/// order statistics: max_i max(i/n - F(u_(i)), F(u_(i)) - (i-1)/n).
template <typename Cdf>
double ks_distance(std::span<const double> samples, Cdf&& cdf) {
  if (samples.empty()) throw InvalidArgument("ks_distance: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double rank = static_cast<double>(i);
    sup = std::max({sup, (rank + 1.0) / n - f, f - rank / n});
  }
  return sup;
}

/// KS statistic against U(0, 1).
double ks_statistic(std::span<const double> samples);

struct Chi2TestResult {
  double ks_distance;
  double critical_value;
  bool pass;
};

/// KS distance of Z samples to the chi-squared(dof) CDF; passes at 1% when
/// below 1.628 / sqrt(n). Requires at least 100 samples.
Chi2TestResult chi2_calibration_test(std::span<const double> z_samples, int dof);

/// KS test of samples against the standard normal CDF at 1%.
Chi2TestResult normality_test(std::span<const double> samples);

}  // namespace rpcg
