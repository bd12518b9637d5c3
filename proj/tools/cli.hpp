#pragma once

#include <iosfwd>

namespace carnot::cli {

// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitUsage = 3;

// Entry point of the `carnot` tool; returns the exit code. Human-readable
// progress goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace carnot::cli
