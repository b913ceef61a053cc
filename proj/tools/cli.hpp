#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace moran::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit statuses of the command-line tool.
enum Exit : int { ok = 0, config_error = 1, inapplicable = 2, budget = 3 };

// Runs the tool on `args` (without the program name). JSON results go to
// `out`, diagnostics to `err`; the return value is the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace moran::cli
