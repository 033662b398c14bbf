#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rpcg {

struct PropertyResult {
  std::string name;
  bool passed = false;
  /// Worst observed value of the checked quantity and the bound it must meet.
  double observed = 0.0;
  double bound = 0.0;
  std::string detail;
};

/// Runs the solver property suites: direction A-orthogonality, Krylov span,
/// psi identities, telescoping mean, dense posterior agreement, posterior
/// rank, trace identity, constant PI Z-statistic and determinism.
std::vector<PropertyResult> run_selftest(std::uint64_t seed = 0);

}  // namespace rpcg
