#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qwalk {

/// Exit codes: 0 success, 1 usage or input error, 2 numerical guard failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Runs the command line; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version() noexcept;

}  // namespace qwalk
