#pragma once

#include <iosfwd>

namespace optrec {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Runs `optrec local|global|verify ...`. The report goes to `out`,
/// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace optrec
