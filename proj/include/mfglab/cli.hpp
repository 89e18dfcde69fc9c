#pragma once

#include <string>
#include <vector>

namespace mfglab {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInvalid = 2, kExitNotConverged = 3, kExitIo = 4 };

/// Runs the command-line driver. Output goes to stdout/stderr.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

} // namespace mfglab
