#pragma once

#include <iosfwd>

namespace kinetic {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // a verification did not pass and --strict was given
  kExitInvalid = 2,      // bad flags, config, model or regime
  kExitUnstable = 3,
  kExitInternal = 4,
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kinetic
