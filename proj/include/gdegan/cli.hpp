#pragma once

// Command-line entry point. Exit codes: 0 success, 1 failed equivariance
// check, 2 input or usage error, 3 a protein produced zero pockets,
// 4 training diverged.

#include <iosfwd>

namespace gdegan {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNoPockets = 3;
inline constexpr int kExitDiverged = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gdegan
