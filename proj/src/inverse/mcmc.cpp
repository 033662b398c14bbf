#include "rpcg/inverse/mcmc.hpp"

#include <cmath>
#include <string>

namespace rpcg::inverse {

void ChainConfig::validate() const {
  if (!(eps > 0.0)) throw InvalidArgument("ChainConfig: eps must be positive");
  if (!(eta > 0.0)) throw InvalidArgument("ChainConfig: eta must be positive");
  if (n_iter < 1) throw InvalidArgument("ChainConfig: n_iter must be >= 1");
  if (!(prior_sd > 0.0)) throw InvalidArgument("ChainConfig: prior_sd must be positive");
  if (max_iter < 0) throw InvalidArgument("ChainConfig: max_iter must be non-negative");
}

std::optional<double> log_likelihood(const ForwardModel& model, double theta, const ChainConfig& cfg, RngStream& rng) {
  const LinearSystem system = assemble(model.mesh, theta);
  const auto& w = model.observation;
  if (cfg.solver == SolverMethod::Exact) {
    const VectorXd x = direct_solve(system.matrix, system.rhs);
    return gaussian_log_density(model.data, w.apply(x), MatrixXd(w.rows(), 0), model.sigma);
  }

  const VectorXd x0 = VectorXd::Zero(model.mesh.free_count());
  SolverConfig solver;
  solver.max_iter = cfg.max_iter;
  if (cfg.solver == SolverMethod::Cg) {
    solver.eps1 = solver.eps2 = cfg.eps;
  } else {
    solver.eps1 = 10.0 * cfg.eps;
    solver.eps2 = cfg.eps;
  }
  const SolveOutcome<double> outcome = cfg.solver == SolverMethod::Rpi
                                           ? rpi_solve(system.matrix, system.rhs, x0, solver, rng)
                                           : pi_solve(system.matrix, system.rhs, x0, solver);
  if (!outcome.converged) return std::nullopt;
  return pn_log_likelihood(model.data, outcome, model.sigma, w);
}

McmcChain rwm_sample(const ForwardModel& model, const ChainConfig& cfg) {
  cfg.validate();
  RngStream rng(cfg.seed, 0);
  const double step = std::sqrt(cfg.eta);
  auto log_prior = [&](double theta) {
    const double z = (theta - cfg.prior_mean) / cfg.prior_sd;
    return -0.5 * z * z;
  };

  McmcChain chain;
  chain.eta = cfg.eta;
  chain.seed = cfg.seed;
  chain.theta.reserve(static_cast<std::size_t>(cfg.n_iter));
  chain.log_posterior.reserve(static_cast<std::size_t>(cfg.n_iter));
  chain.accepted.reserve(static_cast<std::size_t>(cfg.n_iter));

  double theta = cfg.theta0;
  const std::optional<double> initial = log_likelihood(model, theta, cfg, rng);
  if (!initial) throw NumericalBreakdown("rwm_sample: solver did not converge at the initial state");
  double current = log_prior(theta) + *initial;

  for (Index it = 0; it < cfg.n_iter; ++it) {
    const double proposal = theta + step * rng.normal();
    const std::optional<double> ll = log_likelihood(model, proposal, cfg, rng);
    bool accept = false;
    if (!ll) {
      ++chain.rejected_nonconverged;
    } else {
      const double candidate = log_prior(proposal) + *ll;
      accept = std::log(rng.uniform()) < candidate - current;
      if (accept) {
        theta = proposal;
        current = candidate;
        ++chain.accept_count;
      }
    }
    chain.theta.push_back(theta);
    chain.log_posterior.push_back(current);
    chain.accepted.push_back(accept);
  }
  return chain;
}

}  // namespace rpcg::inverse
