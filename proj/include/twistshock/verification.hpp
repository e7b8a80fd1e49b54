// Acceptance checks for the showcase configuration, shared by the `verify`
// subcommand and the acceptance test binary.
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace twistshock {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  int threads = 1;
  /// Criterion ids to run; empty runs all of them.
  std::vector<int> only;
};

/// Runs the selected criteria in id order.  on_result is called as each one
/// finishes.  Simulation runs are shared between criteria within one call.
std::vector<CriterionResult> run_acceptance(
    const VerifyOptions& opts,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS [3] title: detail (1.2 s)"
std::string format_result(const CriterionResult& r);

}  // namespace twistshock
