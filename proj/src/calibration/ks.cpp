#include "rpcg/calibration/ks.hpp"

#include <string>

#include "rpcg/calibration/distributions.hpp"

namespace rpcg {

double ks_statistic(std::span<const double> samples) {
  return ks_distance(samples, [](double u) { return std::clamp(u, 0.0, 1.0); });
}

Chi2TestResult chi2_calibration_test(std::span<const double> z_samples, int dof) {
  if (dof < 1) throw InvalidArgument("chi2_calibration_test: dof must be >= 1");
  if (z_samples.size() < 100) {
    throw InvalidArgument("chi2_calibration_test: need at least 100 samples, got " +
                          std::to_string(z_samples.size()));
  }
  const double ks = ks_distance(z_samples, [dof](double z) { return chi2_cdf(std::max(z, 0.0), dof); });
  const double critical = ks_critical_value_1pct(z_samples.size());
  return {ks, critical, ks < critical};
}

Chi2TestResult normality_test(std::span<const double> samples) {
  const double ks = ks_distance(samples, standard_normal_cdf);
  const double critical = ks_critical_value_1pct(samples.size());
  return {ks, critical, ks < critical};
}

}  // namespace rpcg
