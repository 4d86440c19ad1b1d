#pragma once

// Invariant and oracle-equivalence suite behind `mpgreen_cli verify`.
// Deterministic for a fixed seed: the report text depends on nothing else.

#include <cstdint>
#include <string>
#include <vector>

namespace mpgreen {

struct VerifyOptions {
  int lmax = 2;  // 0..4
  double tol = 1e-4;
  std::uint64_t seed = 1;
  int workers = 0;
};

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  // Empty when everything passed.
  std::string first_failure() const;
  std::string text() const;
};

VerifyReport run_verify(const VerifyOptions& opts);

}  // namespace mpgreen
