#include "rpcg/calibration/sbc.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "rpcg/calibration/distributions.hpp"
#include "rpcg/calibration/ks.hpp"
#include "rpcg/core/format.hpp"
#include "rpcg/core/generators.hpp"
#include "rpcg/core/parallel.hpp"
#include "rpcg/solvers/krylov.hpp"
#include "rpcg/solvers/posterior.hpp"

namespace rpcg {

namespace {

constexpr double degenerate_variance = 1e-300;
constexpr std::uint64_t matrix_stream = 0;
constexpr std::uint64_t test_vector_stream = 1;
constexpr std::uint64_t first_simulation_stream = 2;

struct Simulation {
  enum class Status { Ok, Degenerate, Failed } status = Status::Failed;
  double rank = 0.0;
  std::optional<double> z;
  Index dof = 0;
  Index m = 0;
  Index t = 0;
};

Simulation simulate(const SbcConfig& cfg, const SpdMatrix<double>& a, const Cholesky<double>& chol,
                    const VectorXd& w, Index i) {
  RngStream rng(cfg.seed, first_simulation_stream + static_cast<std::uint64_t>(i));
  const VectorXd x = chol.sample_inverse_covariance(rng);
  const VectorXd b = matvec(a, x);
  const VectorXd x0 = VectorXd::Zero(a.dim());

  SolverConfig solver;
  solver.eps1 = cfg.eps1;
  solver.eps2 = cfg.method == SolverMethod::Cg ? cfg.eps1 : cfg.eps2;
  solver.reorthogonalise = cfg.reorthogonalise;

  Simulation sim;
  SolveOutcome<double> outcome;
  try {
    outcome = cfg.method == SolverMethod::Rpi ? rpi_solve(a, b, x0, solver, rng) : pi_solve(a, b, x0, solver);
  } catch (const NumericalBreakdown&) {
    return sim;
  }
  if (!outcome.converged) return sim;
  sim.m = outcome.m;
  sim.t = outcome.t;

  const double variance = posterior_variance_of(w, outcome);
  if (!(variance > degenerate_variance)) {
    sim.status = Simulation::Status::Degenerate;
    return sim;
  }
  sim.status = Simulation::Status::Ok;
  sim.rank = calibration_rank(w, outcome.mean, x, variance);
  if (cfg.record_z) {
    try {
      sim.z = z_statistic(x, outcome);
      sim.dof = outcome.postiterations();
    } catch (const RankDeficient&) {
      // Leave z unset; the factor lost rank in finite precision.
    }
  }
  return sim;
}

VectorXd resolve_test_vector(const SbcConfig& cfg) {
  if (cfg.test_vector) {
    require_same_dim(cfg.dim, cfg.test_vector->size(), "SBC test vector");
    return *cfg.test_vector;
  }
  RngStream rng(cfg.seed, test_vector_stream);
  VectorXd w = rng.normal_vector(cfg.dim);
  return w / w.norm();
}

}  // namespace

double calibration_rank(const VectorXd& w, const VectorXd& estimate, const VectorXd& truth, double variance) {
  if (!(variance > 0.0)) throw InvalidArgument("calibration_rank: variance must be positive");
  return standard_normal_cdf(w.dot(estimate - truth) / std::sqrt(variance));
}

void SbcConfig::validate() const {
  if (dim < 1) throw InvalidArgument("SbcConfig: dim must be >= 1");
  if (n_sim < 1) throw InvalidArgument("SbcConfig: n_sim must be >= 1");
  if (bins < 1) throw InvalidArgument("SbcConfig: bins must be >= 1");
  if (method == SolverMethod::Exact) throw InvalidArgument("SbcConfig: the exact solver has no posterior to test");
  SolverConfig solver;
  solver.eps1 = eps1;
  solver.eps2 = method == SolverMethod::Cg ? eps1 : eps2;
  solver.validate();
  if (test_vector && (test_vector->size() != dim || !(test_vector->norm() > 0.0))) {
    throw InvalidArgument("SbcConfig: test vector must be non-zero with length dim");
  }
}

Histogram make_histogram(std::span<const double> values, Index bins) {
  if (bins < 1) throw InvalidArgument("make_histogram: bins must be >= 1");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (Index k = 0; k <= bins; ++k) h.edges[static_cast<std::size_t>(k)] = static_cast<double>(k) / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    const auto k = std::clamp<Index>(static_cast<Index>(std::floor(v * bins)), 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(k)];
  }
  return h;
}

CalibrationReport sbc_run(const SbcConfig& cfg) {
  cfg.validate();
  RngStream rng(cfg.seed, matrix_stream);
  return sbc_run(cfg, sample_spd_exp(cfg.dim, rng));
}

CalibrationReport sbc_run(const SbcConfig& cfg, const SpdMatrix<double>& a) {
  cfg.validate();
  require_same_dim(cfg.dim, a.dim(), "sbc_run matrix");
  const auto start = std::chrono::steady_clock::now();

  CalibrationReport report;
  report.config = cfg;
  report.test_vector = resolve_test_vector(cfg);
  const Cholesky<double> chol(a);

  std::vector<Simulation> sims(static_cast<std::size_t>(cfg.n_sim));
  parallel_for(cfg.n_sim, cfg.threads,
               [&](Index i) { sims[static_cast<std::size_t>(i)] = simulate(cfg, a, chol, report.test_vector, i); });

  Index solved = 0;
  for (const auto& sim : sims) {
    switch (sim.status) {
      case Simulation::Status::Ok:
        report.ranks.push_back(sim.rank);
        if (sim.z) {
          report.z_samples.push_back(*sim.z);
          report.z_dof.push_back(sim.dof);
        }
        break;
      case Simulation::Status::Degenerate: ++report.degenerate; break;
      case Simulation::Status::Failed: ++report.failed; continue;
    }
    report.mean_m += static_cast<double>(sim.m);
    report.mean_t += static_cast<double>(sim.t);
    ++solved;
  }
  if (solved > 0) {
    report.mean_m /= static_cast<double>(solved);
    report.mean_t /= static_cast<double>(solved);
  }
  report.histogram = make_histogram(report.ranks, cfg.bins);
  if (report.ranks.empty()) {
    report.ks_statistic = std::numeric_limits<double>::quiet_NaN();
  } else {
    report.ks_statistic = ks_statistic(report.ranks);
    report.critical_value = ks_critical_value_1pct(report.ranks.size());
    report.consistent_with_uniform = report.ks_statistic < report.critical_value;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::json to_json(const SbcConfig& cfg) {
  nlohmann::json j;
  j["dim"] = cfg.dim;
  j["n_sim"] = cfg.n_sim;
  j["eps1"] = cfg.eps1;
  j["eps2"] = cfg.eps2;
  j["method"] = std::string(to_string(cfg.method));
  j["test_vector"] = cfg.test_vector ? nlohmann::json("explicit") : nlohmann::json("random-unit");
  j["matrix_policy"] = cfg.matrix_policy == MatrixPolicy::FixedPerRun ? "fixed-per-run" : "redrawn-per-replicate";
  j["seed"] = cfg.seed;
  j["bins"] = cfg.bins;
  j["record_z"] = cfg.record_z;
  j["reorthogonalise"] = cfg.reorthogonalise;
  return j;
}

nlohmann::json to_json(const CalibrationReport& report) {
  nlohmann::json j;
  j["config"] = to_json(report.config);
  j["test_vector"] = std::vector<double>(report.test_vector.data(),
                                         report.test_vector.data() + report.test_vector.size());
  j["ranks"] = report.ranks;
  j["ks_statistic"] = std::isnan(report.ks_statistic) ? nlohmann::json(nullptr) : nlohmann::json(report.ks_statistic);
  j["ks_critical_value_1pct"] = report.critical_value;
  // Pass/fail at 1% is this tool's rule, not part of SBC itself.
  j["consistent_with_uniform_1pct"] = report.consistent_with_uniform;
  j["histogram"] = {{"edges", report.histogram.edges}, {"counts", report.histogram.counts}};
  if (!report.z_samples.empty()) {
    j["z_samples"] = report.z_samples;
    j["z_dof"] = report.z_dof;
  }
  j["degenerate"] = report.degenerate;
  j["failed"] = report.failed;
  j["mean_m"] = report.mean_m;
  j["mean_t"] = report.mean_t;
  return j;
}

void write_ranks_csv(const std::filesystem::path& path, const CalibrationReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "index,rank\n";
  for (std::size_t i = 0; i < report.ranks.size(); ++i) out << i << ',' << shortest(report.ranks[i]) << '\n';
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "bin_left,bin_right,count\n";
  for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
    out << shortest(histogram.edges[k]) << ',' << shortest(histogram.edges[k + 1]) << ',' << histogram.counts[k] << '\n';
  }
}

}  // namespace rpcg
