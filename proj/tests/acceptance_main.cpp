#include <iostream>

#include "checks.hpp"

int main() {
  int failed = 0;
  for (const auto& check : hypf::cli::acceptance_checks()) {
    const auto r = hypf::cli::run_check(check);
    std::cout << hypf::cli::format_result_line(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
