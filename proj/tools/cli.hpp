#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace avgtrack::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,         // bad flags, unreadable or malformed problem file
  kAssumptionFailure = 2,  // controllability/observability/steady-state/DARE check failed
  kDivergence = 3,         // closed loop became non-finite or a solver gave up
};

/// Runs one command line (args excludes the program name) and returns the
/// exit code. Human-readable output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace avgtrack::cli
