#pragma once

#include <iosfwd>

namespace ridebot::cli {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // fell, blew up, no stop, or nothing converged
  kExitUsage = 2,    // malformed config, flags or input schema
};

/// Entry point behind the `ridebot` binary; streams are injectable for tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ridebot::cli
