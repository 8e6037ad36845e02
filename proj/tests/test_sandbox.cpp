#include <doctest.h>

#include <thread>

#include "forge/error.hpp"
#include "forge/sandbox.hpp"
#include "test_support.hpp"

using namespace forge;

namespace {

Sandbox make_sandbox() { return Sandbox(test::sandbox_config()); }

}  // namespace

TEST_CASE("run_with_tests classifies pass and assertion failure") {
    Sandbox sandbox = make_sandbox();
    const std::string program = "def f(x):\n    return x\n";

    CHECK(sandbox.run_with_tests(program, "assert f(1) == 1").outcome == ExecOutcome::Passed);
    CHECK(sandbox.run_with_tests(program, "assert f(1) == 2").outcome ==
          ExecOutcome::AssertionFailed);
}

TEST_CASE("run_with_tests classifies runtime errors") {
    Sandbox sandbox = make_sandbox();
    const auto report =
        sandbox.run_with_tests("def f(x):\n    return x + 'oops'\n", "f(1)");
    CHECK(report.outcome == ExecOutcome::RuntimeError);
    CHECK(report.stderr_text.find("TypeError") != std::string::npos);
}

TEST_CASE("run_with_tests kills infinite loops at the limit") {
    Sandbox sandbox = make_sandbox();
    ExecLimits limits;
    limits.time_limit = std::chrono::milliseconds(600);
    const auto report =
        sandbox.run_with_tests("while True:\n    pass\n", "assert True", limits);
    CHECK(report.outcome == ExecOutcome::Timeout);
    CHECK(report.duration >= limits.time_limit);
}

TEST_CASE("run_with_tests reports memory exhaustion") {
    Sandbox sandbox = make_sandbox();
    ExecLimits limits;
    limits.memory_limit_mib = 128;
    const auto report = sandbox.run_with_tests(
        "blob = bytearray(1 << 30)\n", "assert True", limits);
    CHECK(report.outcome == ExecOutcome::MemoryExceeded);
}

TEST_CASE("run_exec_only neutralizes harness assertions only") {
    Sandbox sandbox = make_sandbox();
    const std::string wrong = "def f(x):\n    return x + 1\n";

    // wrong values, but no exception: exec-only passes while tests fail
    CHECK(sandbox.run_with_tests(wrong, "assert f(1) == 1").outcome ==
          ExecOutcome::AssertionFailed);
    CHECK(sandbox.run_exec_only(wrong, "assert f(1) == 1").outcome == ExecOutcome::Passed);

    // a type error on the inputs still fails exec-only
    CHECK(sandbox.run_exec_only(wrong, "f('a')\nassert True").outcome ==
          ExecOutcome::RuntimeError);

    // assertion expressions are still evaluated; errors inside them surface
    CHECK(sandbox.run_exec_only(wrong, "assert f('a') == 1").outcome ==
          ExecOutcome::RuntimeError);

    // assertions inside the program text stay active
    CHECK(sandbox.run_exec_only("assert False\n", "").outcome == ExecOutcome::RuntimeError);

    // empty inputs are a vacuous pass
    CHECK(sandbox.run_exec_only("x = 1\n", "").outcome == ExecOutcome::Passed);
}

TEST_CASE("passing the tests implies passing exec-only") {
    Sandbox sandbox = make_sandbox();
    const std::vector<std::pair<std::string, std::string>> programs{
        {"def f(x):\n    return x\n", "assert f(3) == 3"},
        {"import arraykit\nvals = arraykit.tolist(arraykit.asarray([1, 2]))\n",
         "assert vals == [1.0, 2.0]"},
        {"def g():\n    raise ValueError('boom')\n", "g()"},
        {"def h(x):\n    return x * 2\n", "assert h(2) == 5"},
    };
    for (const auto& [program, test] : programs) {
        const bool test_passed = sandbox.run_with_tests(program, test).passed();
        const bool exec_passed = sandbox.run_exec_only(program, test).passed();
        if (test_passed) CHECK(exec_passed);
    }
}

TEST_CASE("fixture library is importable inside the sandbox") {
    Sandbox sandbox = make_sandbox();
    const auto report = sandbox.run_with_tests(
        "import arraykit\nresult = arraykit.tolist(arraykit.add(arraykit.asarray([1]), 2))\n",
        "assert result == [3.0]");
    CHECK(report.outcome == ExecOutcome::Passed);
}

TEST_CASE("a crashing execution does not disturb a concurrent one") {
    Sandbox sandbox = make_sandbox();
    ExecutionReport crash_report;
    ExecutionReport pass_report;
    std::thread crasher([&] {
        crash_report = sandbox.run_with_tests("import sys\nsys.exit(1)\n", "assert True");
    });
    std::thread passer([&] {
        pass_report = sandbox.run_with_tests("x = 41\n", "assert x + 1 == 42");
    });
    crasher.join();
    passer.join();
    CHECK(crash_report.outcome == ExecOutcome::RuntimeError);
    CHECK(pass_report.outcome == ExecOutcome::Passed);
}

TEST_CASE("outbound network access is blocked") {
    Sandbox sandbox = make_sandbox();
    const auto report = sandbox.run_exec_only(
        "import socket\n"
        "conn = socket.create_connection(('127.0.0.1', 9), timeout=1)\n",
        "");
    CHECK(report.outcome == ExecOutcome::RuntimeError);
    CHECK(report.stderr_text.find("disabled in the sandbox") != std::string::npos);
}

TEST_CASE("missing interpreter raises SandboxUnavailable") {
    SandboxConfig config = test::sandbox_config();
    config.interpreter_path = "definitely-not-an-interpreter";
    Sandbox sandbox(config);
    try {
        (void)sandbox.run_with_tests("x = 1", "assert True");
        FAIL("expected SandboxUnavailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SandboxUnavailable);
    }
}

TEST_CASE("run counter tracks executions") {
    Sandbox sandbox = make_sandbox();
    CHECK(sandbox.run_count() == 0);
    (void)sandbox.run_with_tests("x = 1", "assert True");
    (void)sandbox.run_exec_only("x = 1", "");
    CHECK(sandbox.run_count() == 2);
}
