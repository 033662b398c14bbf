#include "rpcg/selftest.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "rpcg/calibration/sbc.hpp"
#include "rpcg/core/generators.hpp"
#include "rpcg/core/quad.hpp"
#include "rpcg/solvers/bayescg.hpp"
#include "rpcg/solvers/krylov.hpp"
#include "rpcg/solvers/posterior.hpp"

namespace rpcg {

namespace {

using Outcome = SolveOutcome<double>;

struct Problem {
  SpdMatrix<double> a;
  VectorXd b;
  VectorXd x;
};

Problem random_problem(Index d, RngStream& rng) {
  SpdMatrix<double> a = sample_spd_exp(d, rng);
  VectorXd x = rng.normal_vector(d);
  VectorXd b = matvec(a, x);
  return {std::move(a), std::move(b), std::move(x)};
}

/// SPD matrix with spectrum uniform on [1, 2].
SpdMatrix<double> well_conditioned(Index d, RngStream& rng) {
  const MatrixXd w = sample_haar_orthogonal(d, rng);
  VectorXd lambda(d);
  for (Index i = 0; i < d; ++i) lambda[i] = 1.0 + rng.uniform();
  MatrixXd a = w * lambda.asDiagonal() * w.transpose();
  return SpdMatrix<double>::from_dense(0.5 * (a + a.transpose()));
}

double max_normalised_conjugacy(const SpdMatrix<double>& a, const MatrixXd& s) {
  const MatrixXd as = a.to_dense() * s;
  const MatrixXd gram = s.transpose() * as;
  double worst = 0.0;
  for (Index i = 0; i < gram.rows(); ++i) {
    for (Index j = 0; j < i; ++j) {
      worst = std::max(worst, std::abs(gram(i, j)) / std::sqrt(gram(i, i) * gram(j, j)));
    }
  }
  return worst;
}

PropertyResult check(std::string name, double observed, double bound, std::string detail = {}) {
  return {std::move(name), observed <= bound, observed, bound, std::move(detail)};
}

PropertyResult orthogonality_plain(std::uint64_t seed) {
  double worst = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    RngStream rng(seed, 100 + rep);
    const auto a = well_conditioned(30, rng);
    const VectorXd b = rng.normal_vector(30);
    const Outcome o = cg_solve(a, b, VectorXd::Zero(30), 1e-10);
    worst = std::max(worst, max_normalised_conjugacy(a, o.trace.directions));
  }
  return check("a-orthogonality (reorthogonalise off, d=30, spectrum in [1,2])", worst, 1e-8);
}

PropertyResult orthogonality_reorth(std::uint64_t seed) {
  double worst = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    RngStream rng(seed, 200 + rep);
    const Problem p = random_problem(50, rng);
    SolverConfig cfg = SolverConfig::full_postiterations(5);
    cfg.keep_directions = true;
    const Outcome o = pi_solve(p.a, p.b, VectorXd::Zero(50), cfg);
    worst = std::max(worst, max_normalised_conjugacy(p.a, o.trace.directions));
  }
  return check("a-orthogonality (reorthogonalise on, d=50, full run)", worst, 1e-12);
}

PropertyResult krylov_span(std::uint64_t seed) {
  double worst = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    RngStream rng(seed, 300 + rep);
    const Problem p = random_problem(20, rng);
    SolverConfig cfg = SolverConfig::plain(1e-6);
    cfg.reorthogonalise = true;
    cfg.keep_directions = true;
    const Outcome o = pi_solve(p.a, p.b, VectorXd::Zero(20), cfg);
    const MatrixXd dense = p.a.to_dense();
    VectorXd krylov = o.trace.initial_residual.normalized();
    for (Index k = 1; k <= o.m; ++k) {
      const MatrixXd span = o.trace.directions.leftCols(k).colwise().normalized();
      Eigen::HouseholderQR<MatrixXd> qr(span);
      const VectorXd coeffs = qr.solve(krylov);
      worst = std::max(worst, (span * coeffs - krylov).norm());
      krylov = (dense * krylov).normalized();
    }
  }
  return check("krylov span: A^{k-1} r0 in span(s_1..s_k), d=20", worst, 1e-8);
}

PropertyResult psi_identities(std::uint64_t seed, PropertyResult& alpha_identity, PropertyResult& telescoping) {
  double worst_psi = 0.0;
  double worst_alpha = 0.0;
  double worst_tele = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    RngStream rng(seed, 400 + rep);
    const Problem p = random_problem(20, rng);
    SolverConfig cfg = SolverConfig::plain(1e-5);
    cfg.reorthogonalise = true;
    cfg.keep_directions = true;
    const VectorXd x0 = rng.normal_vector(20);
    const Outcome o = pi_solve(p.a, p.b, x0, cfg);
    const VectorXd& r0 = o.trace.initial_residual;
    VectorXd telescoped = x0;
    for (Index k = 0; k < o.m; ++k) {
      const auto& step = o.trace.steps[static_cast<std::size_t>(k)];
      const VectorXd v = o.trace.directions.col(k) / std::sqrt(step.curvature);
      const double psi_projection = v.dot(r0);
      worst_psi = std::max(worst_psi, std::abs(psi_projection - step.psi) / std::abs(step.psi));
      worst_alpha = std::max(worst_alpha, std::abs(step.psi / std::sqrt(step.curvature) - step.alpha) / step.alpha);
      telescoped += psi_projection * v;
    }
    worst_tele = std::max(worst_tele, (telescoped - o.cg_mean).norm() / o.cg_mean.norm());
  }
  alpha_identity = check("psi_k / (s_k^T A s_k)^{1/2} = alpha_k", worst_alpha, 1e-12);
  telescoping = check("x_m = x0 + sum_k (v_k^T r0) v_k", worst_tele, 1e-10);
  return check("psi_k = r_{k-1}^T r_{k-1} / (s_k^T A s_k)^{1/2} = v_k^T r0", worst_psi, 1e-10);
}

void dense_posterior_checks(std::uint64_t seed, std::vector<PropertyResult>& out) {
  double worst_agree = 0.0;
  double worst_cg = 0.0;
  double worst_null = 0.0;
  bool rank_ok = true;
  std::ostringstream ranks;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    RngStream rng(seed, 500 + rep);
    const Index d = 10;
    const Index m = 3;
    const Problem p = random_problem(d, rng);
    const VectorXd x0 = VectorXd::Zero(d);
    const Outcome cg = cg_solve(p.a, p.b, x0, 1e-300, m);
    const MatrixXd a = p.a.to_dense();
    const MatrixXd s = cg.trace.directions;
    const MatrixXd a_inv = a.llt().solve(MatrixXd::Identity(d, d));
    const auto general = bayescg_dense(a, p.b, x0, MatrixXd(0.5 * (a_inv + a_inv.transpose())), s);
    const auto inverse = inverse_prior_posterior_dense(a, p.b, x0, s);
    const double scale = inverse.covariance.cwiseAbs().maxCoeff();
    worst_agree = std::max({worst_agree, (general.mean - inverse.mean).norm() / inverse.mean.norm(),
                            (general.covariance - inverse.covariance).cwiseAbs().maxCoeff() / scale});
    worst_cg = std::max(worst_cg, (inverse.mean - cg.final_iterate).norm() / cg.final_iterate.norm());

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(inverse.covariance);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    const Index rank = (eig.eigenvalues().array() > 1e-10 * top).count();
    ranks << rank << ' ';
    rank_ok = rank_ok && rank == d - m;
    const MatrixXd null_images = inverse.covariance * a * s;
    worst_null = std::max(worst_null, null_images.cwiseAbs().maxCoeff() / (scale * (a * s).cwiseAbs().maxCoeff()));
  }
  out.push_back(check("general-prior and inverse-prior dense posteriors agree", worst_agree, 1e-8));
  out.push_back(check("inverse-prior dense mean = CG iterate", worst_cg, 1e-8));
  out.push_back({"posterior covariance rank = d - m (d=10, m=3)", rank_ok, rank_ok ? 0.0 : 1.0, 0.0,
                 "ranks: " + ranks.str()});
  out.push_back(check("Sigma_m A s_j = 0 for j <= m", worst_null, 1e-8));
}

struct QuadProblem {
  SpdMatrix<Quad> a;
  Vector<Quad> b;
  Vector<Quad> x;
};

// Drawn in double, then widened: the system is the same as in double runs.
QuadProblem quad_problem(Index d, RngStream& rng) {
  const SpdMatrix<double> a = sample_spd_exp(d, rng);
  const VectorXd x = rng.normal_vector(d);
  auto aq = SpdMatrix<Quad>::from_dense(a.dense().cast<Quad>());
  Vector<Quad> xq = x.cast<Quad>();
  Vector<Quad> bq = matvec(aq, xq);
  return {std::move(aq), std::move(bq), std::move(xq)};
}

PropertyResult trace_identity(std::uint64_t seed) {
  double worst = 0.0;
  for (std::uint64_t rep = 0; rep < 5; ++rep) {
    RngStream rng(seed, 600 + rep);
    const Index d = 25;
    const QuadProblem p = quad_problem(d, rng);
    const DenseMatrix<Quad> a = p.a.dense();
    for (Index m = 1; m < d; ++m) {
      const auto o = pi_solve(p.a, p.b, Vector<Quad>::Zero(d), SolverConfig::full_postiterations(m));
      const Vector<Quad> error = p.x - o.cg_mean;
      const Quad energy = error.dot(a * error);
      const Quad trace = (o.factor.transpose() * a * o.factor).trace();
      worst = std::max(worst, static_cast<double>(abs(trace - energy) / energy));
    }
  }
  return check("tr(A L L^T) = ||x - x_m||_A^2 (d=25, all m, quad precision)", worst, 1e-8);
}

PropertyResult pi_constant_z(std::uint64_t seed) {
  double worst = 0.0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    RngStream rng(seed, 700 + rep);
    const Index d = 25;
    const QuadProblem p = quad_problem(d, rng);
    SolverConfig cfg = SolverConfig::full_postiterations(0);
    cfg.mean_iterations.reset();
    cfg.eps1 = 1e-1;
    const auto o = pi_solve(p.a, p.b, Vector<Quad>::Zero(d), cfg);
    worst = std::max(worst, std::abs(static_cast<double>(z_statistic(p.x, o)) - static_cast<double>(d - o.m)));
  }
  return check("PI full postiterations: Z = d - m (quad precision)", worst, 1e-6);
}

PropertyResult determinism(std::uint64_t seed) {
  bool same = true;
  {
    RngStream r1(seed, 800);
    RngStream r2(seed, 800);
    same = same && sample_spd_exp(30, r1).dense() == sample_spd_exp(30, r2).dense();
  }
  {
    RngStream rng(seed, 801);
    const Problem p = random_problem(30, rng);
    const SolverConfig cfg = SolverConfig::with_delta(1e-1, 1e-3);
    RngStream z1(seed, 802);
    RngStream z2(seed, 802);
    const Outcome o1 = rpi_solve(p.a, p.b, VectorXd::Zero(30), cfg, z1);
    const Outcome o2 = rpi_solve(p.a, p.b, VectorXd::Zero(30), cfg, z2);
    same = same && o1.mean == o2.mean && o1.factor == o2.factor && o1.draws == o2.draws;
    const Outcome cg = cg_solve(p.a, p.b, VectorXd::Zero(30), 1e-1);
    const Outcome pi = pi_solve(p.a, p.b, VectorXd::Zero(30), cfg);
    same = same && cg.final_iterate == pi.cg_mean && pi.cg_mean == o1.cg_mean && pi.mean == pi.cg_mean;
  }
  {
    SbcConfig cfg;
    cfg.dim = 20;
    cfg.n_sim = 50;
    cfg.seed = seed;
    const auto r1 = sbc_run(cfg);
    const auto r2 = sbc_run(cfg);
    same = same && r1.ranks == r2.ranks;
  }
  return {"determinism and mean coincidence (identical streams give identical results)", same, same ? 0.0 : 1.0, 0.0,
          {}};
}

}  // namespace

std::vector<PropertyResult> run_selftest(std::uint64_t seed) {
  std::vector<PropertyResult> out;
  out.push_back(orthogonality_plain(seed));
  out.push_back(orthogonality_reorth(seed));
  out.push_back(krylov_span(seed));
  PropertyResult alpha;
  PropertyResult telescoping;
  out.push_back(psi_identities(seed, alpha, telescoping));
  out.push_back(alpha);
  out.push_back(telescoping);
  dense_posterior_checks(seed, out);
  out.push_back(trace_identity(seed));
  out.push_back(pi_constant_z(seed));
  out.push_back(determinism(seed));
  return out;
}

}  // namespace rpcg
