#pragma once

#include <iosfwd>

namespace crl {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitParse = 4,
  kExitRuntime = 5,
};

/// Command-line entry point: gen-stream, train, eval, generalize, report,
/// gradcheck. Diagnostics go to `err` as a single line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crl
