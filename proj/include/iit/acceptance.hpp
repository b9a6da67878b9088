#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "iit/protocol.hpp"

namespace iit {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

/// Runs acceptance checks 1-9. Each result line is also written to `log` as it finishes.
std::vector<CheckResult> run_acceptance(Profile profile, std::ostream* log = nullptr);

std::string format_check(const CheckResult& r);

}  // namespace iit
