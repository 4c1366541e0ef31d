#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spfp::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

/// Runs `spfp <command> [flags]`; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spfp::cli
