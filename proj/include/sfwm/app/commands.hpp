#pragma once

namespace sfwm::app {

/// Exit codes of the command-line front end.
enum ExitCode : int { kOk = 0, kNumericFailure = 1, kUsage = 2, kEmpty = 3 };

int run_cli(int argc, char** argv);

}  // namespace sfwm::app
