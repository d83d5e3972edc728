#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fnd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

/// Entry point of the `fnd` command-line tool. `args` excludes the program
/// name. Returns the process exit code: 0 success, 2 usage/config/data
/// error, 3 numeric divergence.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace fnd
