#pragma once

#include <string>
#include <vector>

#include "tvflow/report.hpp"

namespace tvflow {

// One verification check. `criterion` ties the check to the numbered
// acceptance criteria (0 = supplementary).
struct CheckResult {
  int criterion = 0;
  std::string suite;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  std::string details;
};

// Suites: adjointness, energy, gradient-preservation, envelope,
// extinction-1d, small-ball (aliases: ball, fmu), contraction, forms,
// convex, torus, all. Throws UnknownSuite for anything else.
std::vector<std::string> suite_names();
std::vector<CheckResult> run_suite(const std::string& id, bool verbose = false);

}  // namespace tvflow
