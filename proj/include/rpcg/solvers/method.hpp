#pragma once

#include <string>
#include <string_view>

#include "rpcg/core/errors.hpp"

namespace rpcg {

enum class SolverMethod { Exact, Cg, Pi, Rpi };

inline std::string_view to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::Exact: return "exact";
    case SolverMethod::Cg: return "cg";
    case SolverMethod::Pi: return "pi";
    case SolverMethod::Rpi: return "rpi";
  }
  return "?";
}

inline SolverMethod parse_method(std::string_view name) {
  for (auto m : {SolverMethod::Exact, SolverMethod::Cg, SolverMethod::Pi, SolverMethod::Rpi}) {
    if (name == to_string(m)) return m;
  }
  throw InvalidArgument("unknown solver method '" + std::string(name) + "' (expected exact, cg, pi or rpi)");
}

}  // namespace rpcg
