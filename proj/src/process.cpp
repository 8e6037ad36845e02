#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

namespace forge::detail {

namespace {

void set_nonblocking(int fd) {
    fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK);
}

// Writing to a pipe whose reader died must surface as EPIPE, not kill us.
struct SigpipeGuard {
    SigpipeGuard() { signal(SIGPIPE, SIG_IGN); }
};

}  // namespace

std::optional<std::string> resolve_executable(const std::string& command) {
    if (command.empty()) return std::nullopt;
    if (command.find('/') != std::string::npos) {
        return access(command.c_str(), X_OK) == 0 ? std::optional(command) : std::nullopt;
    }
    const char* path_env = std::getenv("PATH");
    std::string path = path_env != nullptr ? path_env : "/usr/local/bin:/usr/bin:/bin";
    std::size_t start = 0;
    while (start <= path.size()) {
        std::size_t end = path.find(':', start);
        if (end == std::string::npos) end = path.size();
        std::string dir = path.substr(start, end - start);
        if (!dir.empty()) {
            std::string candidate = dir + "/" + command;
            if (access(candidate.c_str(), X_OK) == 0) return candidate;
        }
        start = end + 1;
    }
    return std::nullopt;
}

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_data,
                          const std::filesystem::path& cwd,
                          const std::vector<std::pair<std::string, std::string>>& env,
                          std::chrono::milliseconds timeout) {
    static SigpipeGuard sigpipe_guard;

    ProcessResult result;
    const auto started = std::chrono::steady_clock::now();

    int in_pipe[2], out_pipe[2], err_pipe[2], exec_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0 ||
        pipe(exec_pipe) != 0) {
        result.spawn_failed = true;
        return result;
    }
    fcntl(exec_pipe[1], F_SETFD, FD_CLOEXEC);

    // argv / envp blocks must be ready before fork: only async-signal-safe
    // calls are allowed in the child of a multithreaded process.
    std::vector<char*> argv_ptrs;
    argv_ptrs.reserve(argv.size() + 1);
    for (const auto& arg : argv) argv_ptrs.push_back(const_cast<char*>(arg.c_str()));
    argv_ptrs.push_back(nullptr);

    std::vector<std::string> env_strings;
    env_strings.reserve(env.size());
    for (const auto& [key, value] : env) env_strings.push_back(key + "=" + value);
    std::vector<char*> env_ptrs;
    env_ptrs.reserve(env_strings.size() + 1);
    for (auto& entry : env_strings) env_ptrs.push_back(entry.data());
    env_ptrs.push_back(nullptr);

    const std::string cwd_str = cwd.string();

    const pid_t pid = fork();
    if (pid < 0) {
        result.spawn_failed = true;
        return result;
    }
    if (pid == 0) {
        setpgid(0, 0);  // own process group so a timeout kill reaps grandchildren
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        close(exec_pipe[0]);
        if (!cwd_str.empty() && chdir(cwd_str.c_str()) != 0) {
            const int err = errno;
            (void)!write(exec_pipe[1], &err, sizeof(err));
            _exit(127);
        }
        execve(argv_ptrs[0], argv_ptrs.data(), env_ptrs.data());
        const int err = errno;
        (void)!write(exec_pipe[1], &err, sizeof(err));
        _exit(127);
    }

    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    close(exec_pipe[1]);

    // Exec handshake: EOF means the exec succeeded.
    int exec_errno = 0;
    if (read(exec_pipe[0], &exec_errno, sizeof(exec_errno)) > 0) {
        close(exec_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(err_pipe[0]);
        waitpid(pid, nullptr, 0);
        result.spawn_failed = true;
        return result;
    }
    close(exec_pipe[0]);

    set_nonblocking(in_pipe[1]);
    set_nonblocking(out_pipe[0]);
    set_nonblocking(err_pipe[0]);

    std::size_t written = 0;
    bool stdin_open = true;
    if (stdin_data.empty()) {
        close(in_pipe[1]);
        stdin_open = false;
    }
    bool stdout_open = true;
    bool stderr_open = true;
    bool killed = false;
    const auto deadline = started + timeout;
    char buffer[8192];

    while (stdout_open || stderr_open || stdin_open) {
        const auto now = std::chrono::steady_clock::now();
        if (!killed && now >= deadline) {
            kill(-pid, SIGKILL);
            kill(pid, SIGKILL);
            killed = true;
        }
        if (killed && now >= deadline + std::chrono::seconds(2)) {
            // stop draining; a grandchild may still hold the pipe open
            if (stdin_open) close(in_pipe[1]);
            if (stdout_open) close(out_pipe[0]);
            if (stderr_open) close(err_pipe[0]);
            break;
        }
        struct pollfd fds[3];
        nfds_t count = 0;
        int stdin_slot = -1, stdout_slot = -1, stderr_slot = -1;
        if (stdin_open) {
            stdin_slot = static_cast<int>(count);
            fds[count++] = {in_pipe[1], POLLOUT, 0};
        }
        if (stdout_open) {
            stdout_slot = static_cast<int>(count);
            fds[count++] = {out_pipe[0], POLLIN, 0};
        }
        if (stderr_open) {
            stderr_slot = static_cast<int>(count);
            fds[count++] = {err_pipe[0], POLLIN, 0};
        }
        int wait_ms = 50;
        if (!killed) {
            const auto remaining =
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            wait_ms = static_cast<int>(std::min<long long>(50, std::max<long long>(1, remaining)));
        }
        const int ready = poll(fds, count, wait_ms);
        if (ready < 0 && errno != EINTR) break;
        if (ready <= 0) continue;

        if (stdin_slot >= 0 && (fds[stdin_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[stdin_slot].revents & (POLLERR | POLLHUP)) {
                close(in_pipe[1]);
                stdin_open = false;
            } else {
                const ssize_t n = write(in_pipe[1], stdin_data.data() + written,
                                        stdin_data.size() - written);
                if (n > 0) {
                    written += static_cast<std::size_t>(n);
                    if (written == stdin_data.size()) {
                        close(in_pipe[1]);
                        stdin_open = false;
                    }
                } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
                    close(in_pipe[1]);
                    stdin_open = false;
                }
            }
        }
        auto drain = [&](int slot, int fd, std::string& sink, bool& open_flag) {
            if (slot < 0 || !(fds[slot].revents & (POLLIN | POLLHUP | POLLERR))) return;
            while (true) {
                const ssize_t n = read(fd, buffer, sizeof(buffer));
                if (n > 0) {
                    sink.append(buffer, static_cast<std::size_t>(n));
                } else if (n == 0) {
                    close(fd);
                    open_flag = false;
                    break;
                } else {
                    if (errno != EAGAIN && errno != EINTR) {
                        close(fd);
                        open_flag = false;
                    }
                    break;
                }
            }
        };
        drain(stdout_slot, out_pipe[0], result.stdout_text, stdout_open);
        drain(stderr_slot, err_pipe[0], result.stderr_text, stderr_open);
    }

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {}
    result.duration = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    result.timed_out = killed;
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.term_signal = WTERMSIG(status);
    }
    return result;
}

}  // namespace forge::detail
