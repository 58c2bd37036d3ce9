#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace forestseg::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

/// Environment variable holding the default worker count.
inline constexpr const char* kWorkersEnv = "FORESTSEG_WORKERS";

/// Runs the command line tool; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace forestseg::cli
