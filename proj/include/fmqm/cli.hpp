#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fmqm::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kNumeric = 4 };

/// Runs the `fmqm` command line (compare, batch, distort, eval).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace fmqm::cli
