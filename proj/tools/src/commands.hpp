#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace acyl::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kStructural = 2,
  kInfeasible = 3,
  kParse = 4,
};

/// Runs the command line `args` (without the program name), writing the
/// report to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace acyl::cli
