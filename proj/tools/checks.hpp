#pragma once

#include <functional>
#include <string>
#include <vector>

namespace hypf::cli {

struct CheckResult {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  /// Wall-clock budget in seconds; 0 means none.
  double time_limit = 0.0;
};

struct Check {
  std::string id;
  std::string name;
  double time_limit = 0.0;
  std::function<void(CheckResult&)> body;
};

/// The eleven acceptance criteria, in order.
std::vector<Check> acceptance_checks();
/// Per-module invariants reported by `hypf verify` alongside the criteria.
std::vector<Check> invariant_checks();

/// Runs one check, timing it and turning exceptions into failures. A run
/// over its time limit fails.
CheckResult run_check(const Check& check);

std::string format_result_line(const CheckResult& r);

}  // namespace hypf::cli
