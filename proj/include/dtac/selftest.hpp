#pragma once

#include <string>
#include <vector>

namespace dtac {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfTestOptions {
  /// Test hook: added to one entry of every weight matrix the
  /// column-stochasticity suite builds.
  double weight_perturbation = 0.0;
};

/// Desk-scale invariant suites: oracle-equivalence, conservation,
/// reduction, gradient-check, spectral-bound, column-stochasticity.
/// Output is deterministic.
std::vector<SuiteResult> run_selftest(const SelfTestOptions& opt = {});

}  // namespace dtac
