#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xaieval {

// Exit statuses of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailedCells = 1;
inline constexpr int kExitConfig = 2;

// `args[0]` is the program name. Normal output goes to `out`, diagnostics to
// `err`; returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xaieval
