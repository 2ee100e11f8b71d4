#pragma once

#include <iosfwd>

namespace oplab::cli {

// Exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Entry point of the `oplab` tool; writes reports to `out` (or to the
/// --out file) and diagnostics to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oplab::cli
