#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "rpcg/calibration/sbc.hpp"

namespace rpcg {

struct SweepConfig {
  std::vector<Index> dims{100};
  std::vector<double> eps1_grid{1e-1};
  std::vector<double> eps2_grid{1e-2, 1e-3, 1e-5};
  Index replicates = 50;
  Index sims_per_replicate = 1000;
  std::vector<SolverMethod> methods{SolverMethod::Pi, SolverMethod::Rpi};
  std::uint64_t seed = 0;
  MatrixPolicy matrix_policy = MatrixPolicy::RedrawnPerReplicate;
  bool reorthogonalise = false;
  int threads = 1;

  void validate() const;
};

struct SweepRow {
  SolverMethod method = SolverMethod::Rpi;
  Index dim = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double ks_median = 0.0;
  double ks_q1 = 0.0;
  double ks_q3 = 0.0;
  /// Replicates contributing a KS value.
  Index n_replicates = 0;
  /// Replicates where every simulation was degenerate or failed.
  Index failed_replicates = 0;
  Index degenerate_simulations = 0;
  std::vector<double> ks_values;
};

struct SweepSummary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// KS between sims_per_replicate U(0,1) draws and U(0,1), per replicate.
  SweepSummary uniform_baseline;
  std::vector<double> uniform_values;
};

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double p);

/// KS statistics of SBC ranks over a (method, dim, eps1, eps2) grid. Each
/// replicate draws its own matrix and reuses it, with the same prior draws,
/// across all grid points.
SweepTable ks_sweep(const SweepConfig& cfg);

nlohmann::json to_json(const SweepConfig& cfg);

/// Rows of one dimension. Header: method,eps1,eps2,ks_median,ks_q1,ks_q3,n_replicates.
/// The uniform baseline is the last row, with method "uniform" and empty tolerances.
void write_sweep_csv(const std::filesystem::path& path, const SweepTable& table, Index dim);

}  // namespace rpcg
