#pragma once

namespace fcm::app {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDataError = 3,
    kNumericError = 4,
};

/// Entry point of the `fcm` tool. Never throws; errors become exit codes.
int run_cli(int argc, char** argv);

}  // namespace fcm::app
