#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bgq::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kVerificationFailed = 1;
inline constexpr int kInvalidInput = 2;

// Runs the command line `args` (without the program name). Results go to
// `out` unless --out names a file; diagnostics and usage go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bgq::cli
