#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace forge::detail {

struct ProcessResult {
    bool spawn_failed{false};   // exec never happened (missing binary, ...)
    bool timed_out{false};      // killed after the wall-clock deadline
    int exit_code{-1};          // valid when exited normally
    int term_signal{0};         // nonzero when killed by a signal
    std::string stdout_text;
    std::string stderr_text;
    std::chrono::milliseconds duration{0};
};

/// Runs argv[0] with an explicit (scrubbed) environment in the given working
/// directory, feeding stdin_data and capturing both output streams. The child
/// is SIGKILLed once the wall-clock timeout expires.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_data,
                          const std::filesystem::path& cwd,
                          const std::vector<std::pair<std::string, std::string>>& env,
                          std::chrono::milliseconds timeout);

/// PATH lookup for a command name; names containing '/' pass through.
std::optional<std::string> resolve_executable(const std::string& command);

}  // namespace forge::detail
