#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ocsmm::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNoConvergence = 3 };

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace ocsmm::cli
