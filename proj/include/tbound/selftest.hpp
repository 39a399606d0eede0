#pragma once

// Built-in oracle checks for every module, used by `tbound selftest`.

#include <string>
#include <vector>

namespace tbound::selftest {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  /// Name of a check whose reference constant is perturbed by 1%, to show
  /// that the suite catches a wrong formula. Empty means no fault.
  std::string inject_fault;
};

struct Report {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

Report run(const Options& opt = {});

/// Names accepted by Options::inject_fault.
std::vector<std::string> fault_names();

}  // namespace tbound::selftest
