#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace modnls::cli {

inline constexpr const char* kVersion = "0.3.0";

/// Parses args (without the program name), runs the subcommand and returns
/// the exit code: 0 success, 1 usage error, 2 numerical failure. The last line
/// written to err is a `status=...` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modnls::cli
