#pragma once

#include <ostream>

namespace dpgt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;       // bad flags or configuration
inline constexpr int kExitInput = 3;       // unreadable repository or input file
inline constexpr int kExitInfeasible = 4;  // budget cannot cover the floors

inline constexpr const char* kVersion = "0.1.0";

/// Entry point behind the `dpgt` binary: predict, allocate, run, simulate, stats.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpgt::cli
