#pragma once

// Minimal POSIX subprocess runner: spawn, capture combined stdout/stderr,
// enforce a wall-clock timeout, and distinguish exec failure from a nonzero
// exit.

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "proofgen/common.hpp"

namespace proofgen {

struct RunResult {
    int exit_code = -1;
    bool timed_out = false;
    bool exec_failed = false;
    std::string output;  // stdout and stderr interleaved
    std::chrono::milliseconds wall{0};
};

inline RunResult run_process(const std::vector<std::string>& argv,
                             std::chrono::milliseconds timeout,
                             const std::vector<std::pair<std::string, std::string>>& extra_env = {}) {
    if (argv.empty()) throw Error("run_process: empty argv");

    int out_pipe[2];
    int err_pipe[2];  // exec-status pipe (CLOEXEC): child writes errno on exec failure
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
        throw Error(std::string("pipe failed: ") + std::strerror(errno));
    }
    fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

    const auto started = std::chrono::steady_clock::now();
    const pid_t pid = fork();
    if (pid < 0) throw Error(std::string("fork failed: ") + std::strerror(errno));

    if (pid == 0) {
        setpgid(0, 0);  // own process group, so a timeout kill reaches grandchildren
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(out_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        for (const auto& [key, value] : extra_env) setenv(key.c_str(), value.c_str(), 1);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        const int err = errno;
        ssize_t ignored = write(err_pipe[1], &err, sizeof(err));
        (void)ignored;
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);

    RunResult result;
    const auto deadline = started + timeout;
    std::string buffer;
    char chunk[4096];
    bool open = true;
    while (open) {
        const auto now = std::chrono::steady_clock::now();
        if (timeout.count() > 0 && now >= deadline) {
            result.timed_out = true;
            kill(-pid, SIGKILL);  // whole process group
            kill(pid, SIGKILL);
            break;
        }
        int wait_ms = 1000;
        if (timeout.count() > 0) {
            const auto left =
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            wait_ms = static_cast<int>(std::min<long long>(left + 1, 1000));
        }
        pollfd pfd{out_pipe[0], POLLIN, 0};
        const int rc = poll(&pfd, 1, wait_ms);
        if (rc > 0) {
            const ssize_t n = read(out_pipe[0], chunk, sizeof(chunk));
            if (n > 0) buffer.append(chunk, static_cast<std::size_t>(n));
            else open = false;
        }
    }
    // Drain whatever remains after exit or kill. After a kill the group is
    // gone, but bound the wait anyway in case something re-daemonized and
    // still holds the pipe.
    for (;;) {
        pollfd pfd{out_pipe[0], POLLIN, 0};
        if (poll(&pfd, 1, result.timed_out ? 100 : -1) <= 0) break;
        const ssize_t n = read(out_pipe[0], chunk, sizeof(chunk));
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
    close(out_pipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);

    int exec_errno = 0;
    if (read(err_pipe[0], &exec_errno, sizeof(exec_errno)) == sizeof(exec_errno)) {
        result.exec_failed = true;
    }
    close(err_pipe[0]);

    result.output = std::move(buffer);
    result.wall = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) result.exit_code = -WTERMSIG(status);
    return result;
}

}  // namespace proofgen
