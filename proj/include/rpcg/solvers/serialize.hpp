#pragma once

#include <json.hpp>

#include "rpcg/solvers/krylov.hpp"

namespace rpcg {

/// JSON document for a solve: mean, factor (column-major with shape), m, t,
/// residual history and seed.
nlohmann::json to_json(const SolveOutcome<double>& outcome);

}  // namespace rpcg
