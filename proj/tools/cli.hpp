#pragma once

#include <iostream>

namespace renewal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;   ///< validation failure or failed corpus fact
inline constexpr int kExitNumeric = 2;  ///< numeric failure
inline constexpr int kExitUsage = 64;   ///< bad flags or config

/// Runs one command line. Text goes to `out`/`err`; artifacts go to --out.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace renewal::cli
