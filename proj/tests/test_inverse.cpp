#include <doctest.h>

#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rpcg/inverse/experiment.hpp"
#include "rpcg/inverse/fem.hpp"
#include "rpcg/inverse/kde.hpp"
#include "rpcg/inverse/likelihood.hpp"
#include "rpcg/inverse/mcmc.hpp"
#include "rpcg/inverse/mesh.hpp"
#include "rpcg/inverse/model.hpp"

using namespace rpcg;
using namespace rpcg::inverse;

namespace {

// Graph-Laplacian form of the stiffness on a cell-aligned conductivity: on a
// right-isosceles triangle the hypotenuse coupling vanishes and each leg gets
// -k/2, so every cell adds k/2 to each of its four sides.
struct OracleSystem {
  MatrixXd matrix;
  VectorXd rhs;
};

OracleSystem oracle_system(int n, double theta) {
  const int side = n + 1;
  const int total = side * side;
  MatrixXd full = MatrixXd::Zero(total, total);
  auto id = [&](int i, int j) { return j * side + i; };
  auto add_edge = [&](int a, int b, double w) {
    full(a, a) += w;
    full(b, b) += w;
    full(a, b) -= w;
    full(b, a) -= w;
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const bool inside = i >= n / 4 && i < 3 * n / 4 && j >= n / 4 && j < 3 * n / 4;
      const double k = inside ? 1.0 + std::exp(theta) : 1.0;
      add_edge(id(i, j), id(i + 1, j), k / 2);
      add_edge(id(i, j + 1), id(i + 1, j + 1), k / 2);
      add_edge(id(i, j), id(i, j + 1), k / 2);
      add_edge(id(i + 1, j), id(i + 1, j + 1), k / 2);
    }
  }
  std::vector<int> free;
  std::vector<int> fixed;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) (j == 0 || j == n ? fixed : free).push_back(id(i, j));
  VectorXd g(static_cast<Index>(fixed.size()));
  for (std::size_t f = 0; f < fixed.size(); ++f) {
    const double z1 = static_cast<double>(fixed[f] % side) / n;
    const double z2 = static_cast<double>(fixed[f] / side) / n;
    g[static_cast<Index>(f)] = (1 - z1) * (1 - z2) + z1 * z2;
  }
  OracleSystem out;
  out.matrix = full(free, free);
  out.rhs = -full(free, fixed) * g;
  return out;
}

VectorXd solve_free(const Mesh& mesh, double theta) {
  const auto system = assemble(mesh, theta);
  return direct_solve(system.matrix, system.rhs);
}

double value_at(const Mesh& mesh, const VectorXd& u_full, double z1, double z2) {
  return u_full[mesh.node_at({z1, z2})];
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

TEST_CASE("mesh") {
  for (int n : {4, 8, 16}) {
    const Mesh mesh(n);
    CHECK(mesh.node_count() == (n + 1) * (n + 1));
    CHECK(mesh.free_count() == (n + 1) * (n + 1) - 2 * (n + 1));
    CHECK(mesh.triangles().size() == static_cast<std::size_t>(2 * n * n));
    double area = 0.0;
    for (const auto& t : mesh.triangles()) {
      const auto& a = mesh.nodes()[static_cast<std::size_t>(t[0])];
      const auto& b = mesh.nodes()[static_cast<std::size_t>(t[1])];
      const auto& c = mesh.nodes()[static_cast<std::size_t>(t[2])];
      const double signed_area = 0.5 * ((b.z1 - a.z1) * (c.z2 - a.z2) - (c.z1 - a.z1) * (b.z2 - a.z2));
      CHECK(signed_area > 0.0);
      area += signed_area;
    }
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i <= n; ++i) {
      CHECK(mesh.is_dirichlet(mesh.node(i, 0)));
      CHECK(mesh.is_dirichlet(mesh.node(i, n)));
      CHECK_FALSE(mesh.is_dirichlet(mesh.node(i, n / 2)));
    }
    CHECK(mesh.node_at({0.25, 0.75}) == mesh.node(n / 4, 3 * n / 4));
  }
  CHECK_THROWS_AS(Mesh(6), InvalidArgument);
  CHECK_THROWS_AS(Mesh(0), InvalidArgument);
  CHECK_THROWS_AS(Mesh(4).node_at({0.1, 0.5}), InvalidArgument);
}

TEST_CASE("conductivity and boundary data") {
  CHECK(conductivity({0.5, 0.5}, 0.0) == 2.0);
  CHECK(conductivity({0.1, 0.5}, 3.0) == 1.0);
  CHECK(boundary_value({0.0, 0.0}) == 1.0);
  CHECK(boundary_value({1.0, 0.0}) == 0.0);
  CHECK(boundary_value({0.3, 1.0}) == doctest::Approx(0.3));
}

TEST_CASE("assembly matches a hand-built system") {
  for (int n : {4, 8}) {
    for (double theta : {-40.0, 0.0, 1.5}) {
      const auto system = assemble(Mesh(n), theta);
      const auto oracle = oracle_system(n, theta);
      const MatrixXd k = system.matrix.to_dense();
      CHECK((k - oracle.matrix).cwiseAbs().maxCoeff() <= 1e-12 * oracle.matrix.cwiseAbs().maxCoeff());
      CHECK((system.rhs - oracle.rhs).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(k == k.transpose());
      CHECK_NOTHROW(Cholesky<double>(system.matrix));
    }
  }
}

TEST_CASE("right-hand side does not depend on theta") {
  const Mesh mesh(16);
  CHECK(assemble(mesh, -5.0).rhs == assemble(mesh, 5.0).rhs);
}

TEST_CASE("solution symmetries and maximum principle") {
  for (double theta : {-40.0, 2.0}) {
    const Mesh mesh(16);
    const VectorXd u = full_solution(mesh, solve_free(mesh, theta));
    CHECK(value_at(mesh, u, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(u.minCoeff() >= -1e-12);
    CHECK(u.maxCoeff() <= 1.0 + 1e-12);
    for (int i = 0; i <= 16; ++i) {
      for (int j = 0; j <= 16; ++j) {
        const double here = u[mesh.node(i, j)];
        CHECK(u[mesh.node(16 - i, 16 - j)] == doctest::Approx(here).epsilon(1e-12));
        CHECK(u[mesh.node(16 - i, j)] == doctest::Approx(1.0 - here).epsilon(1e-12));
      }
    }
    const auto y = exact_observables(mesh, observe(mesh, observation_points()), theta);
    // Corners ordered (lo,lo), (hi,lo), (lo,hi), (hi,hi).
    CHECK(y[0] == doctest::Approx(y[3]).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(y[2]).epsilon(1e-12));
    CHECK(y[0] + y[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("observables converge under refinement") {
  auto corner = [](int n) {
    const Mesh mesh(n);
    return exact_observables(mesh, observe(mesh, observation_points()), 2.0)[0];
  };
  const double u8 = corner(8), u16 = corner(16), u32 = corner(32), u64 = corner(64);
  const double d1 = std::abs(u8 - u16), d2 = std::abs(u16 - u32), d3 = std::abs(u32 - u64);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
  CHECK(d3 < 1e-2);
}

TEST_CASE("observation operator") {
  const Mesh mesh(8);
  const auto w = observe(mesh, observation_points());
  CHECK(w.rows() == 4);
  CHECK(w.cols() == mesh.free_count());
  RngStream rng(1);
  const VectorXd x = rng.normal_vector(mesh.free_count());
  CHECK(w.apply(x) == w.dense() * x);
  const MatrixXd m = rng.normal_matrix(mesh.free_count(), 3);
  CHECK(w.apply(m) == w.dense() * m);
  CHECK_THROWS_AS(ObservationOperator({0, 99}, 10), InvalidArgument);
  CHECK_THROWS_AS(observe(mesh, {{0.5, 0.0}}), InvalidArgument);
}

TEST_CASE("gaussian log density") {
  CHECK(gaussian_log_density(VectorXd::Zero(1), VectorXd::Zero(1), MatrixXd(1, 0), 1.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));

  RngStream rng(2);
  const VectorXd y = rng.normal_vector(4);
  const VectorXd mean = rng.normal_vector(4);
  const MatrixXd f = rng.normal_matrix(4, 2);
  const double sigma = 0.3;
  const MatrixXd cov = sigma * sigma * MatrixXd::Identity(4, 4) + f * f.transpose();
  const VectorXd e = y - mean;
  const double oracle =
      -0.5 * (4.0 * std::log(2.0 * std::numbers::pi) + std::log(cov.determinant()) + e.dot(cov.inverse() * e));
  CHECK(gaussian_log_density(y, mean, f, sigma) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_log_density(y, mean, f, 0.0), InvalidArgument);
}

TEST_CASE("solver likelihoods") {
  RngStream data_rng(3);
  const VectorXd data = generate_data(32, 2.0, 0.01, data_rng);
  const ForwardModel model = ForwardModel::make(16, 0.01, data);
  ChainConfig cfg;
  RngStream rng(4);
  cfg.solver = SolverMethod::Exact;
  const double exact = *log_likelihood(model, 2.0, cfg, rng);
  const VectorXd w_x = exact_observables(model.mesh, model.observation, 2.0);
  CHECK(exact == doctest::Approx(gaussian_log_density(data, w_x, MatrixXd(4, 0), 0.01)));

  // Tight tolerances approach the exact likelihood.
  cfg.eps = 1e-10;
  for (auto m : {SolverMethod::Cg, SolverMethod::Pi, SolverMethod::Rpi}) {
    cfg.solver = m;
    CHECK(*log_likelihood(model, 2.0, cfg, rng) == doctest::Approx(exact).epsilon(1e-6));
  }
  cfg.solver = SolverMethod::Cg;
  cfg.eps = 1e-12;
  cfg.max_iter = 1;
  CHECK_FALSE(log_likelihood(model, 2.0, cfg, rng).has_value());
}

TEST_CASE("noise-free data and a regression fixture") {
  RngStream rng(0);
  const VectorXd clean = generate_data(32, 2.0, 0.0, rng);
  const Mesh mesh(32);
  CHECK(clean == exact_observables(mesh, observe(mesh, observation_points()), 2.0));
  const VectorXd fixture{{0.53547257354775968, 0.46452742645226952, 0.46452742645227046, 0.53547257354776001}};
  CHECK((clean - fixture).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS_AS(generate_data(32, 2.0, -1.0, rng), InvalidArgument);
}

TEST_CASE("flat likelihood recovers the prior") {
  RngStream rng(5);
  const ForwardModel model = ForwardModel::make(4, 1e6, generate_data(8, 2.0, 0.0, rng));
  ChainConfig cfg;
  cfg.solver = SolverMethod::Exact;
  cfg.eta = 4.0;
  cfg.n_iter = 40000;
  cfg.seed = 6;
  const McmcChain chain = rwm_sample(model, cfg);
  const ChainSummary s = summarise(chain, 0.2);
  // Batch-means standard error of the mean.
  const std::size_t skip = chain.theta.size() - static_cast<std::size_t>(s.kept);
  const std::size_t batches = 40;
  const std::size_t len = static_cast<std::size_t>(s.kept) / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    const auto first = chain.theta.begin() + static_cast<std::ptrdiff_t>(skip + b * len);
    means.push_back(std::accumulate(first, first + static_cast<std::ptrdiff_t>(len), 0.0) / static_cast<double>(len));
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double se = std::sqrt(ss / (batches - 1) / batches);
  CHECK(std::abs(s.mean) <= 4.0 * se);
  CHECK(s.sd == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("chains") {
  RngStream rng(7);
  const ForwardModel model = ForwardModel::make(16, 0.01, generate_data(32, 2.0, 0.01, rng));
  ChainConfig cfg;
  cfg.solver = SolverMethod::Exact;
  cfg.n_iter = 2000;
  cfg.seed = 8;
  const McmcChain a = rwm_sample(model, cfg);
  const McmcChain b = rwm_sample(model, cfg);
  CHECK(a.theta == b.theta);
  CHECK(a.theta.size() == 2000);
  CHECK(a.acceptance_rate() > 0.1);
  CHECK(a.acceptance_rate() < 0.8);

  cfg.solver = SolverMethod::Rpi;
  cfg.n_iter = 200;
  CHECK(rwm_sample(model, cfg).theta == rwm_sample(model, cfg).theta);

  cfg.eta = 0.0;
  CHECK_THROWS_AS(rwm_sample(model, cfg), InvalidArgument);
}

TEST_CASE("kernel density estimate") {
  RngStream rng(9);
  std::vector<double> x(5000);
  for (double& v : x) v = rng.normal();
  const DensityCurve curve = kde(x);
  CHECK(curve.grid.size() == 512);
  CHECK(curve.bandwidth == doctest::Approx(silverman_bandwidth(x)));
  double mass = 0.0;
  double ise = 0.0;
  for (std::size_t i = 1; i < curve.grid.size(); ++i) {
    const double h = curve.grid[i] - curve.grid[i - 1];
    mass += 0.5 * h * (curve.density[i] + curve.density[i - 1]);
    const double e0 = curve.density[i - 1] - normal_pdf(curve.grid[i - 1]);
    const double e1 = curve.density[i] - normal_pdf(curve.grid[i]);
    ise += 0.5 * h * (e0 * e0 + e1 * e1);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(ise < 0.01);

  // A single repeated point with a given bandwidth is one Gaussian bump.
  const std::vector<double> same(10, 1.0);
  const DensityCurve bump = kde(same, 0.5, 101);
  CHECK(bump.grid.front() == doctest::Approx(-0.5));
  CHECK(bump.grid.back() == doctest::Approx(2.5));
  CHECK(bump.density[50] == doctest::Approx(normal_pdf(0.0) / 0.5));

  CHECK_THROWS_AS(kde(std::vector<double>(5, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(silverman_bandwidth(same), InvalidArgument);
}

TEST_CASE("chain summary") {
  McmcChain chain;
  for (int i = 1; i <= 10; ++i) {
    chain.theta.push_back(i);
    chain.accepted.push_back(i % 2 == 0);
  }
  chain.accept_count = 5;
  const ChainSummary s = summarise(chain, 0.2);
  CHECK(s.kept == 8);
  CHECK(s.mean == doctest::Approx(6.5));
  CHECK(s.sd == doctest::Approx(std::sqrt(6.0)));
  CHECK(s.acceptance_rate == doctest::Approx(0.5));
  CHECK(s.q025 == doctest::Approx(3.175));
}

TEST_CASE("experiment") {
  InverseConfig cfg;
  cfg.n_iter = 300;
  cfg.seed = 3;
  const auto a = run_inverse_experiment(cfg);
  cfg.threads = 4;
  const auto b = run_inverse_experiment(cfg);
  CHECK(a.methods.size() == 4);
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    CHECK_FALSE(a.methods[i].error.has_value());
    CHECK(a.methods[i].chain.theta == b.methods[i].chain.theta);
  }
  CHECK(a.at(SolverMethod::Pi).summary.kept == 240);
  const auto j = summary_json(a);
  CHECK(j["methods"].contains("rpi"));
  CHECK(j["data"].size() == 4);

  cfg.data_mesh_n = 16;
  CHECK_THROWS_AS(run_inverse_experiment(cfg), InvalidArgument);
}
