#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vtest::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,        // bad flags or unreadable input
    kPrecondition = 3, // data precondition (cross-sample ties)
    kVerification = 4, // oracle mismatch
    kInternal = 1,
};

inline constexpr int kSchemaVersion = 1;

/// Runs the command line `args` (args[0] is the program name). Data goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vtest::cli
