#pragma once

#include <iosfwd>

namespace occ {

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int usage = 1;
inline constexpr int fail = 2;
inline constexpr int inconclusive = 3;
inline constexpr int capacity = 4;
}  // namespace exit_code

/// Subcommands check, run, verify, bridge. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace occ
