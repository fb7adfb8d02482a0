#pragma once

#include <string>
#include <vector>

namespace hmg::cli {

/// Entry point behind the binary: parses argv, dispatches, writes artifacts.
/// Exit codes: 0 success, 2 flag/usage errors, 1 module errors (with a
/// one-line JSON error record on stderr).
int run_command(const std::vector<std::string>& args);
int run_command(int argc, const char* const* argv);

}  // namespace hmg::cli
