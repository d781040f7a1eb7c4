#pragma once

#include <iosfwd>

namespace synthqa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitData = 2;

// Parses argv, runs one subcommand and maps errors to exit codes:
// 1 for invalid arguments or configuration, 2 for unusable input data.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace synthqa::cli
