#pragma once

#include <string>
#include <vector>

namespace stmatch {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNotConverged = 2, kExitDominance = 3 };

/// Runs `stmatch <command> [options]`; args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace stmatch
