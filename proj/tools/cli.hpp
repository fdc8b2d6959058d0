#pragma once

#include <iosfwd>

namespace swbf::cli {

/// Exit codes of the swbf tool.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,     // bad arguments or configuration
  kCorrupt = 3,   // unreadable or corrupt input file
  kMetric = 4,    // empty region or undefined metric
};

/// Entry point shared by the binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace swbf::cli
