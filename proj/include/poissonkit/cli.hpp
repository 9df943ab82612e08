#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace poissonkit::cli {

/// Exit codes of every subcommand.
enum ExitCode : int {
  kPass = 0,
  kInputError = 1,
  kFail = 2,
  kInconclusive = 3,  // NonRegular or NotTested
  kFlowAborted = 4,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace poissonkit::cli
