#pragma once

#include <iosfwd>

namespace eerec {

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

/// Runs `eerec <subcommand> ...`; output and diagnostics go to the streams.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eerec
