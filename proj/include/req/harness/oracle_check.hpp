#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace req {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Self-checks of the solver and controllers against exact references:
// temperature limits, dual constraint satisfaction, tabular fixed points,
// Gaussian KL decomposition, orientation error and pose tracking.
std::vector<CheckResult> run_oracle_checks(std::uint64_t seed = 0);

}  // namespace req
