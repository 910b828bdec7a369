#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spinring::cli {

/// Exit codes: 0 success, 1 runtime or numerical failure, 2 usage error.
enum ExitCode : int { kSuccess = 0, kFailure = 1, kUsage = 2 };

/// Runs `spinctl` with args (excluding the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinring::cli
