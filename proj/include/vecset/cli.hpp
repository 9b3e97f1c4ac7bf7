#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vecset::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // verification or recall failure, per-query errors
  kUsage = 2,
  kIo = 3,       // I/O or format error
};

/// Entry point of the `vecset` tool; argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vecset::cli
