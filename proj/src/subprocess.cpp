#include "xaieval/subprocess.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "xaieval/error.hpp"

extern char** environ;

namespace xaieval {

std::string ProcessOutcome::describe() const {
    if (timed_out) {
        return "timeout exceeded";
    }
    if (signal != 0) {
        return "killed by signal " + std::to_string(signal);
    }
    return "exit status " + std::to_string(exit_code);
}

ProcessOutcome run_process(const std::vector<std::string>& argv,
                           std::chrono::duration<double> timeout) {
    if (argv.empty()) {
        throw RunnerError("empty runner command");
    }
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) {
        args.push_back(const_cast<char*>(a.c_str()));
    }
    args.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, STDERR_FILENO, STDOUT_FILENO);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    pid_t pid = 0;
    const int rc = posix_spawnp(&pid, args[0], &actions, &attr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) {
        throw RunnerError("cannot start runner '" + argv[0] + "': " + std::strerror(rc));
    }

    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(timeout);
    auto pause = std::chrono::milliseconds(1);
    ProcessOutcome outcome;
    while (true) {
        int status = 0;
        const pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            if (WIFEXITED(status)) {
                outcome.exit_code = WEXITSTATUS(status);
            } else if (WIFSIGNALED(status)) {
                outcome.signal = WTERMSIG(status);
            }
            return outcome;
        }
        if (done < 0 && errno != EINTR) {
            throw RunnerError(std::string("waitpid failed: ") + std::strerror(errno));
        }
        if (clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            outcome.timed_out = true;
            return outcome;
        }
        std::this_thread::sleep_for(pause);
        pause = std::min(pause * 2, std::chrono::milliseconds(50));
    }
}

}  // namespace xaieval
