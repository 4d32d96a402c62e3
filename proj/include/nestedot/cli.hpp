#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nestedot {

/// Process exit codes of the command line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitInvalidInput = 2,
    kExitOracleMismatch = 3,
    kExitUsage = 64,
};

/// Runs one command (`args` excludes the program name). The JSON report goes
/// to `out`, diagnostics and usage text to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nestedot
