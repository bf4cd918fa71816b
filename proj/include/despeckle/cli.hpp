#pragma once

namespace despeckle {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitNumerical = 3,
};

/// Entry point of the `despeckle` command line tool (add-noise, despeckle,
/// evaluate, ablate). Diagnostics go to stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace despeckle
