#pragma once

#include <string>
#include <vector>

namespace surfcomp::cli {

enum ExitCode : int { kOk = 0, kPartialFailure = 1, kUsage = 2 };

/// Parses and runs one subcommand. args[0] is the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace surfcomp::cli
