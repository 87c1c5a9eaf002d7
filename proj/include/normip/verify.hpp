#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace normip {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  /// Multiplies every trial count; below 1 gives a quick smoke run whose
  /// statistical thresholds still apply.
  double scale = 1.0;
  /// Criteria to run (1..10); empty runs all.
  std::vector<int> only;
};

/// The ten acceptance criteria, in order. `on_result` is called as each
/// finishes. Criterion 10 also audits the bit counts recorded by 5 to 9.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS [3] name: detail (1.2 s)".
std::string format_result(const CriterionResult& r);

}  // namespace normip
