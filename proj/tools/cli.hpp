#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reviewchain::cli {

/// Exit codes of the reviewchain command.
enum Exit : int {
  kOk = 0,
  kViolations = 1,
  kUsage = 2,
  kFailed = 3,
};

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reviewchain::cli
