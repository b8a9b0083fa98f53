#pragma once

#include <string>
#include <vector>

namespace tvflow {

// One quantitative check. A failed check carries at least one witness
// snapshot time (or sample position, for pointwise audits).
struct AuditReport {
  std::string name;
  bool pass = false;
  double measured = 0.0;   // worst observed value
  double bound = 0.0;      // bound it is compared against
  double tolerance = 0.0;  // relative tolerance applied to the bound
  std::vector<double> violation_times;
  std::string details;
};

}  // namespace tvflow
