#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace topoprior::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kData = 2,
    kFailure = 3,  // divergence or verification mismatch
};

/// Runs the command line `args` (without the program name), writing reports
/// to `out` and diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topoprior::cli
