#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emsim::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kProvider = 3,
  kValidation = 4,
};

/// The whole command line, minus the program name. Never throws.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace emsim::cli
