#pragma once

#include <string>
#include <vector>

namespace eqn::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kDataError = 2,
    kNumericalError = 3,
};

/// Runs the `eqn` command line. `args[0]` is the program name.
int run(const std::vector<std::string>& args);

}  // namespace eqn::cli
