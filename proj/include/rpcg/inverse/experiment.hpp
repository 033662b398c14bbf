#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpcg/inverse/kde.hpp"
#include "rpcg/inverse/mcmc.hpp"

namespace rpcg::inverse {

/// Porous-medium inverse problem: one data set from a fine mesh, then one
/// random-walk Metropolis chain per solver on the inference mesh.
struct InverseConfig {
  int mesh_n = 16;
  /// Data mesh; must be at least twice as fine as the inference mesh.
  int data_mesh_n = 32;
  double theta_true = 2.0;
  double sigma = 0.01;
  double eps = 0.1;
  Index n_iter = 10000;
  double eta_exact = 0.2;
  double eta_cg = 0.2;
  double eta_pi = 0.4;
  double eta_rpi = 0.4;
  /// Leading fraction of each chain dropped before summaries and KDE.
  double burn_in = 0.2;
  std::vector<SolverMethod> methods{SolverMethod::Exact, SolverMethod::Cg, SolverMethod::Pi, SolverMethod::Rpi};
  std::uint64_t seed = 0;
  int threads = 1;

  double eta_for(SolverMethod method) const;
  void validate() const;
};

struct ChainSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double acceptance_rate = 0.0;
  Index kept = 0;
};

ChainSummary summarise(const McmcChain& chain, double burn_in);

struct MethodResult {
  SolverMethod method = SolverMethod::Exact;
  McmcChain chain;
  DensityCurve density;
  ChainSummary summary;
  /// Set when the chain failed; the other fields are then empty.
  std::optional<std::string> error;
};

struct InverseResult {
  VectorXd data;
  std::vector<MethodResult> methods;

  const MethodResult& at(SolverMethod method) const;
};

InverseResult run_inverse_experiment(const InverseConfig& cfg);

nlohmann::json to_json(const InverseConfig& cfg);
nlohmann::json summary_json(const InverseResult& result);

/// Columns iter,theta,log_post,accepted.
void write_chain_csv(const std::filesystem::path& path, const McmcChain& chain);
/// Columns theta,density.
void write_kde_csv(const std::filesystem::path& path, const DensityCurve& curve);

}  // namespace rpcg::inverse
