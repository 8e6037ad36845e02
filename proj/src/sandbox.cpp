#include "forge/sandbox.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>

#include "forge/error.hpp"
#include "process.hpp"

namespace forge {

namespace {

// Exit-code protocol between the driver and the parent process.
constexpr int kExitPassed = 0;
constexpr int kExitAssertionFailed = 3;
constexpr int kExitRuntimeError = 4;
constexpr int kExitMemoryExceeded = 5;

// Runs inside the target interpreter. Mode "test" keeps assertions active;
// mode "exec" rewrites every assert in the harness to evaluate-and-discard,
// so only uncaught exceptions fail the run. The program text is never
// transformed.
constexpr const char* kDriverSource = R"PY(
import ast
import os
import sys


def _apply_limits(mem_mib):
    try:
        import resource
        limit = mem_mib * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
    except Exception:
        pass


def _block_network():
    import socket

    def _blocked(*args, **kwargs):
        raise RuntimeError("network access is disabled in the sandbox")

    socket.socket = _blocked
    socket.socketpair = _blocked
    socket.create_connection = _blocked


class _NeutralizeAsserts(ast.NodeTransformer):
    def visit_Assert(self, node):
        return ast.copy_location(ast.Expr(value=node.test), node)


def main():
    mode = sys.argv[1]
    mem_mib = int(sys.argv[2])
    _apply_limits(mem_mib)
    if os.environ.get("FORGE_SANDBOX_ALLOW_NETWORK") != "1":
        _block_network()
    with open("program.py", "r") as handle:
        program_source = handle.read()
    with open("harness.py", "r") as handle:
        harness_source = handle.read()
    try:
        program_code = compile(program_source, "program.py", "exec")
        tree = ast.parse(harness_source, "harness.py")
        if mode == "exec":
            tree = _NeutralizeAsserts().visit(tree)
            ast.fix_missing_locations(tree)
        harness_code = compile(tree, "harness.py", "exec")
    except SyntaxError:
        import traceback
        traceback.print_exc()
        sys.exit(4)
    scope = {"__name__": "__main__"}
    try:
        exec(program_code, scope)
        exec(harness_code, scope)
    except AssertionError:
        import traceback
        traceback.print_exc()
        sys.exit(3 if mode == "test" else 4)
    except MemoryError:
        sys.exit(5)
    except BaseException:
        import traceback
        traceback.print_exc()
        sys.exit(4)
    sys.exit(0)


main()
)PY";

class TempDir {
public:
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        std::random_device rd;
        const auto tag = std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                         std::to_string(rd());
        path_ = std::filesystem::temp_directory_path() / ("forge-sbx-" + tag);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
        raise(ErrorCode::SandboxUnavailable, "cannot write " + path.string());
    }
}

std::string join_paths(const std::vector<std::string>& entries) {
    std::string out;
    for (const auto& entry : entries) {
        if (!out.empty()) out.push_back(':');
        // the child runs inside a temp-dir jail, so entries must be absolute
        out += std::filesystem::absolute(entry).string();
    }
    return out;
}

}  // namespace

const char* to_string(ExecOutcome outcome) {
    switch (outcome) {
        case ExecOutcome::Passed: return "passed";
        case ExecOutcome::AssertionFailed: return "assertion_failed";
        case ExecOutcome::RuntimeError: return "runtime_error";
        case ExecOutcome::Timeout: return "timeout";
        case ExecOutcome::MemoryExceeded: return "memory_exceeded";
    }
    return "unknown";
}

Sandbox::Sandbox(SandboxConfig config) : config_(std::move(config)) {
    if (config_.workers < 1) {
        raise(ErrorCode::DomainError, "sandbox.workers must be >= 1");
    }
}

ExecutionReport Sandbox::run_with_tests(const std::string& program, const std::string& test,
                                        std::optional<ExecLimits> limits) const {
    return run_mode("test", program, test, limits);
}

ExecutionReport Sandbox::run_exec_only(const std::string& program,
                                       const std::string& test_inputs,
                                       std::optional<ExecLimits> limits) const {
    return run_mode("exec", program, test_inputs, limits);
}

ExecutionReport Sandbox::run_mode(const char* mode, const std::string& program,
                                  const std::string& test,
                                  const std::optional<ExecLimits>& limits) const {
    const auto interpreter = detail::resolve_executable(config_.interpreter_path);
    if (!interpreter) {
        raise(ErrorCode::SandboxUnavailable,
              "interpreter '" + config_.interpreter_path + "' not found");
    }

    // bounded worker pool
    {
        std::unique_lock lock(pool_mutex_);
        pool_cv_.wait(lock, [&] { return pool_active_ < config_.workers; });
        ++pool_active_;
    }
    struct PoolRelease {
        const Sandbox* self;
        ~PoolRelease() {
            {
                std::lock_guard lock(self->pool_mutex_);
                --self->pool_active_;
            }
            self->pool_cv_.notify_one();
        }
    } release{this};

    const ExecLimits effective = limits.value_or(config_.default_limits);

    TempDir dir;
    write_file(dir.path() / "program.py", program);
    write_file(dir.path() / "harness.py", test);
    write_file(dir.path() / "_forge_driver.py", kDriverSource);

    std::vector<std::pair<std::string, std::string>> env{
        {"PATH", "/usr/local/bin:/usr/bin:/bin"},
        {"HOME", dir.path().string()},
        {"TMPDIR", dir.path().string()},
        {"LC_ALL", "C"},
        {"PYTHONDONTWRITEBYTECODE", "1"},
        {"PYTHONHASHSEED", "0"},
        {"PYTHONIOENCODING", "utf-8"},
    };
    if (!config_.pythonpath.empty()) {
        env.emplace_back("PYTHONPATH", join_paths(config_.pythonpath));
    }
    if (config_.allow_network) {
        env.emplace_back("FORGE_SANDBOX_ALLOW_NETWORK", "1");
    }

    const std::vector<std::string> argv{*interpreter, "_forge_driver.py", mode,
                                        std::to_string(effective.memory_limit_mib)};
    ++runs_;
    detail::ProcessResult proc =
        detail::run_process(argv, "", dir.path(), env, effective.time_limit);

    if (proc.spawn_failed) {
        raise(ErrorCode::SandboxUnavailable,
              "failed to launch interpreter '" + *interpreter + "'");
    }

    ExecutionReport report;
    report.stdout_text = std::move(proc.stdout_text);
    report.stderr_text = std::move(proc.stderr_text);
    report.duration = proc.duration;
    if (proc.timed_out) {
        report.outcome = ExecOutcome::Timeout;
        if (report.duration < effective.time_limit) {
            report.duration = effective.time_limit;
        }
    } else if (proc.term_signal != 0) {
        report.outcome = ExecOutcome::RuntimeError;
    } else {
        switch (proc.exit_code) {
            case kExitPassed: report.outcome = ExecOutcome::Passed; break;
            case kExitAssertionFailed: report.outcome = ExecOutcome::AssertionFailed; break;
            case kExitMemoryExceeded: report.outcome = ExecOutcome::MemoryExceeded; break;
            case kExitRuntimeError:
            default: report.outcome = ExecOutcome::RuntimeError; break;
        }
    }
    return report;
}

}  // namespace forge
