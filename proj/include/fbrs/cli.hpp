#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fbrs::cli {

enum ExitCode : int {
  kSuccess = 0,
  kSolverFailure = 1,  // solver did not reach Solved, validation failed, ...
  kUsageError = 2,     // bad flags, unreadable or malformed input
};

/// Dispatches `solve`, `mpc`, `validate` and `oracle`. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace fbrs::cli
