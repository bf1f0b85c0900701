#pragma once

#include <string>
#include <vector>

namespace tethersim {

struct CheckResult {
  std::string name;
  bool passed{false};
  std::string detail;
};

/// End-to-end physics and solver checks: energy conservation, constraint
/// drift (plus a zero-gain negative control), pendulum frequency, Jacobian
/// step-refinement consistency and QP-versus-projected-gradient agreement.
/// `fast` shrinks run lengths and sample counts to finish well under a
/// minute.
std::vector<CheckResult> run_validation_suite(bool fast);

}  // namespace tethersim
