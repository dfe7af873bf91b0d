#pragma once

#include <string>
#include <vector>

namespace clgbn::cli {

/// Exit statuses of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kDataError = 3;
inline constexpr int kNumericalError = 4;

int run(int argc, char** argv);
/// `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace clgbn::cli
