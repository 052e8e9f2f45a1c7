#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace swarmform::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalFailure = 3, kTrialInfeasible = 4 };

// Runs the command line `args` (without the program name). Output goes to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swarmform::cli
