#pragma once

// Entry point of the relhop command-line tool, callable in-process so tests
// can drive it without spawning a shell.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace relhop::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 1, kVerificationFailed = 2 };

/// `args` excludes the program name. Results go to `out` (or to --out),
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "START:STOP:STEP" with STEP > 0 and START < STOP, both ends inclusive.
std::vector<double> parse_grid(std::string_view text);

std::string version();

}  // namespace relhop::cli
