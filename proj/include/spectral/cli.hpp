#pragma once

#include <iosfwd>

namespace spectral::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 1, kInternalError = 2 };

/// Entry point of the `spcw` tool. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spectral::cli
