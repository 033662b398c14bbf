#pragma once

#include <cstdint>
#include <vector>

#include "rpcg/inverse/likelihood.hpp"
#include "rpcg/solvers/method.hpp"

namespace rpcg::inverse {

struct ChainConfig {
  SolverMethod solver = SolverMethod::Exact;
  /// CG stops at eps; PI and RPI use eps2 = eps and eps1 = 10 eps.
  double eps = 0.1;
  /// Proposal variance: theta' ~ N(theta, eta).
  double eta = 0.2;
  Index n_iter = 10000;
  std::uint64_t seed = 0;
  double theta0 = 0.0;
  double prior_mean = 0.0;
  double prior_sd = 1.0;
  /// Solver iteration cap, 0 for the default 10 d.
  Index max_iter = 0;

  void validate() const;
};

struct McmcChain {
  /// State after each iteration.
  std::vector<double> theta;
  std::vector<double> log_posterior;
  std::vector<bool> accepted;
  Index accept_count = 0;
  /// Proposals rejected because the solver did not converge.
  Index rejected_nonconverged = 0;
  double eta = 0.0;
  std::uint64_t seed = 0;

  double acceptance_rate() const {
    return theta.empty() ? 0.0 : static_cast<double>(accept_count) / static_cast<double>(theta.size());
  }
};

/// Log-likelihood of theta with the chosen solver; the system is assembled
/// and solved from x0 = 0. RPI draws its z_k from `rng`. Returns nullopt if
/// an iterative solve does not converge.
std::optional<double> log_likelihood(const ForwardModel& model, double theta, const ChainConfig& cfg, RngStream& rng);

/// Random-walk Metropolis targeting N(prior_mean, prior_sd^2) x likelihood.
/// RPI is re-randomised at every likelihood evaluation.
McmcChain rwm_sample(const ForwardModel& model, const ChainConfig& cfg);

}  // namespace rpcg::inverse
