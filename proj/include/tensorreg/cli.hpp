#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tensorreg {

/// Exit codes: 0 success, 2 usage or I/O error, 3 numerical failure.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// `args` excludes the program name. JSON result lines go to `out`,
/// human-readable diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace tensorreg
