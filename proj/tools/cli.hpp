#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fri::cli {

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code.  Diagnostics go to `err`, human-readable results to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fri::cli
