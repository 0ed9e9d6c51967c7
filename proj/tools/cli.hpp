#pragma once

#include <iosfwd>

namespace gbc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

// Entry point of the gbc tool. Writes command output to `out` (unless a file
// is requested) and diagnostics to `err`; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gbc::cli
