#include "rpcg/solvers/serialize.hpp"

#include <vector>

namespace rpcg {

nlohmann::json to_json(const SolveOutcome<double>& outcome) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(outcome.mean.data(), outcome.mean.data() + outcome.mean.size());
  j["cg_mean"] = std::vector<double>(outcome.cg_mean.data(), outcome.cg_mean.data() + outcome.cg_mean.size());
  // Eigen's default storage is column-major, so the raw buffer is already in order.
  j["factor"] = {
      {"rows", outcome.factor.rows()},
      {"cols", outcome.factor.cols()},
      {"layout", "column-major"},
      {"values", std::vector<double>(outcome.factor.data(), outcome.factor.data() + outcome.factor.size())},
  };
  j["m"] = outcome.m;
  j["t"] = outcome.t;
  j["converged"] = outcome.converged;
  j["residual_history"] = outcome.residual_history;
  j["draws"] = outcome.draws;
  j["seed"] = outcome.seed ? nlohmann::json(*outcome.seed) : nlohmann::json(nullptr);
  j["stream"] = outcome.stream ? nlohmann::json(*outcome.stream) : nlohmann::json(nullptr);
  return j;
}

}  // namespace rpcg
