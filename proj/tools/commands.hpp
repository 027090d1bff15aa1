#pragma once

namespace eegdx::cli {

// Parses argv, dispatches to a subcommand, and maps exceptions to exit
// codes: 0 success, 1 runtime/evaluation failure, 2 usage/configuration
// error.
int run(int argc, char** argv);

}  // namespace eegdx::cli
