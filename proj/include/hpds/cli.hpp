#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hpds::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIdentifiabilityFailed = 2,
  kNumericFailure = 3,
  kScaleGuard = 4,
};

// args[0] is the program name. Diagnostics go to err; help text to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hpds::cli
