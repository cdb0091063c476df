#pragma once

#include <iosfwd>

namespace crowdteach {

/// Exit statuses returned by dispatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs one command line (argv[0] is the program name). Diagnostics go to
/// `err` as a single line; command output and help text go to `out`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crowdteach
