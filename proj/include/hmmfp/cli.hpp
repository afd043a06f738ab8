#pragma once

#include <iosfwd>

namespace hmmfp {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitImpossibleObservation = 3,
  kExitInvariantViolation = 4,
};

/// Entry point of the `hmmfp` tool: oracle, fixedpoint, duality, represent,
/// attention-demo. Returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hmmfp
