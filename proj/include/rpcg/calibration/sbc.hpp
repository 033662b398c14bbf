#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "rpcg/core/spd_matrix.hpp"
#include "rpcg/solvers/method.hpp"

namespace rpcg {

enum class MatrixPolicy { FixedPerRun, RedrawnPerReplicate };

/// Simulation-based calibration settings. Defaults are the desk-scale
/// version of the d = 100 experiment.
struct SbcConfig {
  Index dim = 100;
  Index n_sim = 1000;
  double eps1 = 1e-1;
  double eps2 = 1e-5;
  SolverMethod method = SolverMethod::Rpi;
  /// Test vector w; when unset a random unit vector is drawn from the seed.
  std::optional<VectorXd> test_vector;
  MatrixPolicy matrix_policy = MatrixPolicy::FixedPerRun;
  std::uint64_t seed = 0;
  Index bins = 20;
  /// Also compute the Z-statistic of every simulation.
  bool record_z = false;
  bool reorthogonalise = false;
  int threads = 1;

  void validate() const;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<Index> counts;
};

Histogram make_histogram(std::span<const double> values, Index bins);

struct CalibrationReport {
  SbcConfig config;
  VectorXd test_vector;
  /// t_i = Phi(w^T (mean_i - x_i) / sqrt(w^T L_i L_i^T w)), in simulation order.
  std::vector<double> ranks;
  double ks_statistic = 0.0;
  double critical_value = 0.0;
  bool consistent_with_uniform = false;
  Histogram histogram;
  std::vector<double> z_samples;
  std::vector<Index> z_dof;
  /// Simulations with w^T L L^T w <= 1e-300, excluded from the ranks.
  Index degenerate = 0;
  /// Simulations whose solve did not converge, excluded from the ranks.
  Index failed = 0;
  double mean_m = 0.0;
  double mean_t = 0.0;
  double wall_seconds = 0.0;
};

/// t = Phi(w^T (estimate - truth) / sqrt(variance)), variance = w^T L L^T w.
double calibration_rank(const VectorXd& w, const VectorXd& estimate, const VectorXd& truth, double variance);

/// Runs SBC with the prior N(0, A^{-1}) on a matrix drawn from the config seed.
CalibrationReport sbc_run(const SbcConfig& cfg);

/// Runs SBC against a given matrix. Simulation i uses stream 2 + i of the
/// config seed for both the prior draw and the solver's randomisation.
CalibrationReport sbc_run(const SbcConfig& cfg, const SpdMatrix<double>& a);

nlohmann::json to_json(const SbcConfig& cfg);
nlohmann::json to_json(const CalibrationReport& report);

void write_ranks_csv(const std::filesystem::path& path, const CalibrationReport& report);
/// Columns bin_left,bin_right,count.
void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram);

}  // namespace rpcg
