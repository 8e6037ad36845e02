#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace forge {

enum class ExecOutcome { Passed, AssertionFailed, RuntimeError, Timeout, MemoryExceeded };

const char* to_string(ExecOutcome outcome);

struct ExecLimits {
    std::chrono::milliseconds time_limit{10000};
    std::size_t memory_limit_mib{512};
};

struct ExecutionReport {
    ExecOutcome outcome{ExecOutcome::RuntimeError};
    std::string stdout_text;
    std::string stderr_text;
    std::chrono::milliseconds duration{0};

    bool passed() const { return outcome == ExecOutcome::Passed; }
};

struct SandboxConfig {
    std::string interpreter_path{"python3"};
    ExecLimits default_limits{};
    int workers{4};
    std::vector<std::string> pythonpath;  // directories holding the target library
    bool allow_network{false};
};

/// Executes candidate programs in a fresh interpreter subprocess per call:
/// working-directory jail, scrubbed environment, address-space cap, wall-clock
/// kill, and a socket shim that blocks outbound network access.
class Sandbox {
public:
    explicit Sandbox(SandboxConfig config);

    /// Runs the program followed by the test code with assertions active.
    ExecutionReport run_with_tests(const std::string& program, const std::string& test,
                                   std::optional<ExecLimits> limits = std::nullopt) const;

    /// Runs the program followed by the test inputs with every assertion in
    /// the test code rewritten to evaluate-and-discard: success means only
    /// "no uncaught exception".
    ExecutionReport run_exec_only(const std::string& program, const std::string& test_inputs,
                                  std::optional<ExecLimits> limits = std::nullopt) const;

    /// Total number of executions performed by this sandbox.
    std::uint64_t run_count() const { return runs_.load(); }

    const SandboxConfig& config() const { return config_; }

private:
    ExecutionReport run_mode(const char* mode, const std::string& program,
                             const std::string& test,
                             const std::optional<ExecLimits>& limits) const;

    SandboxConfig config_;
    mutable std::atomic<std::uint64_t> runs_{0};
    mutable std::mutex pool_mutex_;
    mutable std::condition_variable pool_cv_;
    mutable int pool_active_{0};
};

}  // namespace forge
