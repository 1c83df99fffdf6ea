#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sanm::verification {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  std::size_t sde_paths = 10000;
  std::size_t sde_steps = 1000;
};

// Closed-form checks of the optimal-control derivation, Tweedie's formula,
// the guided-SDE drift identity and its Monte Carlo terminal moments.
std::vector<CheckResult> run_verification_suite(const SuiteOptions& options = {});

// One "check=<name> status=pass|fail measured=<v> tolerance=<v>" line per
// result, then "summary passed=<n> failed=<m>".
void write_report(std::ostream& os, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace sanm::verification
