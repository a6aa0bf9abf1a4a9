#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hlift::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kSchemaError = 2,
  kBudgetExceeded = 3,
  kBoundViolation = 4,
};

/// Runs the hlift command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hlift::cli
