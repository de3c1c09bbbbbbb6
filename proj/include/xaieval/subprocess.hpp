#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace xaieval {

struct ProcessOutcome {
    int exit_code = -1;  // valid when exited normally
    int signal = 0;      // nonzero when terminated by a signal
    bool timed_out = false;

    bool succeeded() const noexcept { return !timed_out && signal == 0 && exit_code == 0; }
    std::string describe() const;
};

// Runs argv[0] (PATH lookup) in its own process group. The child's stdout is
// redirected to the parent's stderr; stderr is inherited. On timeout the
// whole group is killed.
ProcessOutcome run_process(const std::vector<std::string>& argv,
                           std::chrono::duration<double> timeout);

}  // namespace xaieval
