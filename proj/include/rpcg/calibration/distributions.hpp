#pragma once

namespace rpcg {

/// Phi(x) = erfc(-x / sqrt 2) / 2.
double standard_normal_cdf(double x);

/// Regularised lower incomplete gamma function P(a, x), a > 0, x >= 0.
/// Series expansion below x = a + 1, Lentz continued fraction above.
double regularized_gamma_p(double a, double x);

/// CDF of the chi-squared law with k degrees of freedom, P(k/2, x/2).
double chi2_cdf(double x, int k);

}  // namespace rpcg
