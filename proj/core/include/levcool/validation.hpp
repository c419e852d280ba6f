#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace levcool {

struct OracleResult {
  std::string name;
  double error = 0.0;      // measured deviation
  double tolerance = 0.0;  // pass when error <= tolerance
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

struct ValidationOptions {
  /// Replaces the calibrated alpha in the profile oracle (fault injection).
  double alpha_override = 0.0;
};

/// Fast cross-module oracles (closed forms and identities).
std::vector<OracleResult> validate_suite(const ValidationOptions& options = {});
void print_report(const std::vector<OracleResult>& results, std::ostream& out);
bool all_passed(const std::vector<OracleResult>& results);

}  // namespace levcool
