#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "rpcg/calibration/distributions.hpp"
#include "rpcg/calibration/ks.hpp"
#include "rpcg/calibration/sbc.hpp"
#include "rpcg/calibration/sweep.hpp"
#include "rpcg/core/generators.hpp"

using namespace rpcg;

namespace {

// erf by its Maclaurin series in long double; converges for moderate |x|.
long double erf_series(long double x) {
  long double term = x;
  long double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    sum += term / (2 * n + 1);
  }
  return 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
  const double c = 0.5 * (a + b);
  const double h = b - a;
  const double fa = f(a), fb = f(b), fc = f(c);
  const double whole = h / 6.0 * (fa + 4.0 * fc + fb);
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fhi, double fmid, double s, double eps, int level) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (level <= 0 || std::abs(left + right - s) <= 15.0 * eps) return left + right + (left + right - s) / 15.0;
        return rec(lo, mid, flo, fmid, flm, left, eps / 2.0, level - 1) +
               rec(mid, hi, fmid, fhi, frm, right, eps / 2.0, level - 1);
      };
  return rec(a, b, fa, fb, fc, whole, tol, depth);
}

std::vector<double> uniforms(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> u(n);
  for (double& v : u) v = rng.uniform();
  return u;
}

SbcConfig small_sbc() {
  SbcConfig cfg;
  cfg.dim = 20;
  cfg.n_sim = 200;
  cfg.eps1 = 1e-1;
  cfg.eps2 = 1e-5;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("standard normal CDF") {
  CHECK(standard_normal_cdf(0.0) == 0.5);
  CHECK(std::abs(standard_normal_cdf(40.0) - 1.0) <= 1e-15);
  CHECK(standard_normal_cdf(-40.0) >= 0.0);
  CHECK(standard_normal_cdf(-40.0) < 1e-300);
  CHECK(standard_normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
  for (double x : {-3.0, -1.5, -0.3, 0.2, 1.0, 2.5}) {
    const double oracle = static_cast<double>(0.5L * (1.0L + erf_series(x / std::sqrt(2.0L))));
    CHECK(standard_normal_cdf(x) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("chi-squared CDF") {
  CHECK(chi2_cdf(0.0, 3) == 0.0);
  CHECK(chi2_cdf(2.0 * std::log(2.0), 2) == doctest::Approx(0.5).epsilon(1e-14));
  // k = 2 is the exponential law with mean 2.
  for (double x : {0.1, 1.0, 7.0, 40.0}) CHECK(chi2_cdf(x, 2) == doctest::Approx(1.0 - std::exp(-x / 2.0)).epsilon(1e-13));

  const auto density = [](int k) {
    return [k](double x) {
      if (x <= 0.0) return 0.0;
      const double h = 0.5 * k;
      return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) - std::lgamma(h));
    };
  };
  for (auto [k, x] : std::vector<std::pair<int, double>>{{5, 5.0}, {3, 0.7}, {30, 25.0}, {30, 45.0}, {1, 2.0}}) {
    // The k = 1 density is singular at 0; integrate in u = sqrt(x) instead.
    double oracle;
    if (k == 1) {
      const auto f = density(1);
      oracle = adaptive_simpson([&](double u) { return u == 0.0 ? std::sqrt(2.0 / M_PI) : 2.0 * u * f(u * u); }, 0.0,
                                std::sqrt(x), 1e-13, 50);
    } else {
      oracle = adaptive_simpson(density(k), 0.0, x, 1e-13, 50);
    }
    CHECK(chi2_cdf(x, k) == doctest::Approx(oracle).epsilon(1e-9));
  }
  CHECK_THROWS_AS(chi2_cdf(1.0, 0), InvalidArgument);
  CHECK_THROWS_AS(chi2_cdf(-1.0, 2), InvalidArgument);
  CHECK_THROWS_AS(regularized_gamma_p(0.0, 1.0), InvalidArgument);
}

TEST_CASE("KS statistic") {
  const std::vector<double> half{0.5};
  CHECK(ks_statistic(half) == doctest::Approx(0.5));
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  CHECK(ks_statistic(grid) == doctest::Approx(0.1).epsilon(1e-12));

  auto u = uniforms(10000, 1);
  const double d = ks_statistic(u);
  CHECK(d < 0.02);
  std::reverse(u.begin(), u.end());
  CHECK(ks_statistic(u) == d);

  CHECK_THROWS_AS(ks_statistic(std::vector<double>{}), InvalidArgument);
  CHECK(ks_critical_value_1pct(100) == doctest::Approx(0.1628));

  // Against the definition sup_x |F_n(x) - x| evaluated on a fine grid.
  const auto small = uniforms(50, 2);
  double brute = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double x = i / 200000.0;
    const double fn = static_cast<double>(std::count_if(small.begin(), small.end(), [&](double v) { return v <= x; })) / 50.0;
    brute = std::max(brute, std::abs(fn - x));
  }
  CHECK(ks_statistic(small) == doctest::Approx(brute).epsilon(1e-4));
}

TEST_CASE("chi-squared calibration test") {
  RngStream rng(5);
  std::vector<double> z(2000);
  for (double& v : z) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double n = rng.normal();
      s += n * n;
    }
    v = s;
  }
  const auto good = chi2_calibration_test(z, 4);
  CHECK(good.pass);
  CHECK(good.critical_value == doctest::Approx(1.628 / std::sqrt(2000.0)));
  CHECK_FALSE(chi2_calibration_test(z, 8).pass);

  const std::vector<double> constant(500, 4.0);
  const auto flat = chi2_calibration_test(constant, 4);
  const double f = chi2_cdf(4.0, 4);
  CHECK(flat.ks_distance == doctest::Approx(std::max(f, 1.0 - f)));
  CHECK_FALSE(flat.pass);

  CHECK_THROWS_AS(chi2_calibration_test(std::vector<double>(99, 1.0), 4), InvalidArgument);

  std::vector<double> normals(1000);
  for (double& v : normals) v = rng.normal();
  CHECK(normality_test(normals).pass);
  for (double& v : normals) v *= 2.0;
  CHECK_FALSE(normality_test(normals).pass);
}

TEST_CASE("calibration_rank is uniform for an exact posterior") {
  // x ~ N(mu, s^2) with the posterior N(mu, s^2) exactly: ranks must be uniform.
  int passed = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    RngStream rng(rep, 4);
    const VectorXd w = VectorXd::Unit(3, 1);
    const VectorXd mu{{0.5, -1.0, 2.0}};
    std::vector<double> ranks(500);
    for (double& t : ranks) {
      VectorXd x = mu;
      x[1] += 1.5 * rng.normal();
      t = calibration_rank(w, mu, x, 2.25);
    }
    passed += ks_statistic(ranks) < ks_critical_value_1pct(ranks.size()) ? 1 : 0;
  }
  CHECK(passed >= 98);
  CHECK(calibration_rank(VectorXd::Ones(1), VectorXd::Zero(1), VectorXd::Zero(1), 1.0) == 0.5);
  CHECK_THROWS_AS(calibration_rank(VectorXd::Ones(1), VectorXd::Zero(1), VectorXd::Zero(1), 0.0), InvalidArgument);
}

TEST_CASE("histogram") {
  const std::vector<double> v{0.0, 0.05, 0.1, 0.5, 0.999, 1.0};
  const auto h = make_histogram(v, 10);
  CHECK(h.edges.size() == 11);
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[1] == 1);
  CHECK(h.counts[5] == 1);
  CHECK(h.counts[9] == 2);
  CHECK(std::accumulate(h.counts.begin(), h.counts.end(), Index{0}) == 6);
  CHECK_THROWS_AS(make_histogram(v, 0), InvalidArgument);
}

TEST_CASE("SBC run") {
  const SbcConfig cfg = small_sbc();
  const auto report = sbc_run(cfg);
  CHECK(report.ranks.size() + static_cast<std::size_t>(report.degenerate + report.failed) == 200);
  for (double t : report.ranks) {
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }
  CHECK(std::accumulate(report.histogram.counts.begin(), report.histogram.counts.end(), Index{0}) ==
        static_cast<Index>(report.ranks.size()));
  CHECK(report.test_vector.norm() == doctest::Approx(1.0));
  CHECK(report.mean_t >= report.mean_m);

  const auto again = sbc_run(cfg);
  CHECK(again.ranks == report.ranks);

  SbcConfig threaded = cfg;
  threaded.threads = 4;
  CHECK(sbc_run(threaded).ranks == report.ranks);

  SbcConfig other = cfg;
  other.seed = 4;
  CHECK(sbc_run(other).ranks != report.ranks);
}

TEST_CASE("SBC with the CG posterior is fully degenerate") {
  SbcConfig cfg = small_sbc();
  cfg.method = SolverMethod::Cg;
  const auto report = sbc_run(cfg);
  CHECK(report.degenerate == 200);
  CHECK(report.ranks.empty());
  CHECK(std::isnan(report.ks_statistic));
}

TEST_CASE("SBC records Z with its degrees of freedom") {
  SbcConfig cfg = small_sbc();
  cfg.method = SolverMethod::Pi;
  cfg.record_z = true;
  cfg.n_sim = 20;
  const auto report = sbc_run(cfg);
  REQUIRE_FALSE(report.z_samples.empty());
  CHECK(report.z_samples.size() == report.z_dof.size());
  for (double z : report.z_samples) CHECK(z >= 0.0);
}

TEST_CASE("SBC config validation") {
  SbcConfig cfg = small_sbc();
  cfg.n_sim = 0;
  CHECK_THROWS_AS(sbc_run(cfg), InvalidArgument);
  cfg = small_sbc();
  cfg.eps2 = 1.0;
  CHECK_THROWS_AS(sbc_run(cfg), InvalidArgument);
  cfg = small_sbc();
  cfg.method = SolverMethod::Exact;
  CHECK_THROWS_AS(sbc_run(cfg), InvalidArgument);
  cfg = small_sbc();
  cfg.test_vector = VectorXd::Zero(20);
  CHECK_THROWS_AS(sbc_run(cfg), InvalidArgument);
  cfg = small_sbc();
  RngStream rng(1);
  CHECK_THROWS_AS(sbc_run(cfg, sample_spd_exp(10, rng)), DimensionMismatch);
}

TEST_CASE("quantile") {
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({7.0}, 0.9) == 7.0);
  CHECK(std::isnan(quantile({}, 0.5)));
}

TEST_CASE("KS sweep") {
  SweepConfig cfg;
  cfg.dims = {15};
  cfg.eps1_grid = {1e-1};
  cfg.eps2_grid = {1e-2, 1e-4};
  cfg.replicates = 3;
  cfg.sims_per_replicate = 50;
  cfg.methods = {SolverMethod::Cg, SolverMethod::Pi, SolverMethod::Rpi};
  cfg.seed = 9;
  const auto table = ks_sweep(cfg);
  CHECK(table.rows.size() == 5);
  const auto& cg = table.rows.front();
  CHECK(cg.method == SolverMethod::Cg);
  CHECK(cg.n_replicates == 0);
  CHECK(cg.failed_replicates == 3);
  for (const auto& row : table.rows) {
    if (row.method == SolverMethod::Cg) continue;
    CHECK(row.n_replicates == 3);
    CHECK(row.ks_q1 <= row.ks_median);
    CHECK(row.ks_median <= row.ks_q3);
  }
  CHECK(table.uniform_values.size() == 3);

  SweepConfig threaded = cfg;
  threaded.threads = 3;
  const auto again = ks_sweep(threaded);
  for (std::size_t i = 0; i < table.rows.size(); ++i) CHECK(again.rows[i].ks_values == table.rows[i].ks_values);
  CHECK(again.uniform_values == table.uniform_values);

  SweepConfig bad = cfg;
  bad.dims.clear();
  CHECK_THROWS_AS(ks_sweep(bad), InvalidArgument);
  bad = cfg;
  bad.eps1_grid = {1e-3};
  bad.eps2_grid = {1e-2};
  bad.methods = {SolverMethod::Pi};
  CHECK_THROWS_AS(ks_sweep(bad), InvalidArgument);
}
