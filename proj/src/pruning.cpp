#include "forge/pruning.hpp"

#include <algorithm>
#include <json.hpp>

#include "forge/error.hpp"
#include "forge/prompts.hpp"
#include "process.hpp"

namespace forge {

using nlohmann::json;

namespace {

// Batch syntax check: reads a JSON array of sources from stdin, prints a JSON
// array of {ok, diagnostic}. ast.parse only -- nothing is executed.
constexpr const char* kParseSnippet = R"PY(
import ast, json, sys
sources = json.loads(sys.stdin.read())
results = []
for src in sources:
    if not src.strip():
        results.append({"ok": False, "diagnostic": "empty source"})
        continue
    try:
        ast.parse(src)
        results.append({"ok": True, "diagnostic": ""})
    except SyntaxError as exc:
        line = exc.lineno if exc.lineno is not None else 0
        col = exc.offset if exc.offset is not None else 0
        results.append({"ok": False,
                        "diagnostic": "line %d, column %d: %s" % (line, col, exc.msg)})
print(json.dumps(results))
)PY";

std::vector<SyntaxResult> batch_verify_syntax(const std::vector<std::string>& sources,
                                              const std::string& grammar,
                                              const std::string& interpreter_path) {
    if (grammar != "python3" && grammar != "python") {
        raise(ErrorCode::UnsupportedGrammar, "no parser for grammar '" + grammar + "'");
    }
    const auto interpreter = detail::resolve_executable(interpreter_path);
    if (!interpreter) {
        raise(ErrorCode::SandboxUnavailable,
              "interpreter '" + interpreter_path + "' not found for syntax check");
    }
    const std::string payload = json(sources).dump();
    const std::vector<std::pair<std::string, std::string>> env{
        {"PATH", "/usr/local/bin:/usr/bin:/bin"},
        {"LC_ALL", "C"},
        {"PYTHONDONTWRITEBYTECODE", "1"},
        {"PYTHONIOENCODING", "utf-8"},
    };
    detail::ProcessResult proc =
        detail::run_process({*interpreter, "-c", kParseSnippet}, payload,
                            std::filesystem::temp_directory_path(), env,
                            std::chrono::milliseconds(30000));
    if (proc.spawn_failed || proc.timed_out || proc.exit_code != 0) {
        raise(ErrorCode::SandboxUnavailable,
              "syntax checker failed to run: " + proc.stderr_text);
    }
    json parsed = json::parse(proc.stdout_text, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array() || parsed.size() != sources.size()) {
        raise(ErrorCode::SandboxUnavailable, "syntax checker produced malformed output");
    }
    std::vector<SyntaxResult> results;
    results.reserve(sources.size());
    for (const auto& row : parsed) {
        results.push_back(SyntaxResult{row.value("ok", false), row.value("diagnostic", "")});
    }
    return results;
}

}  // namespace

const char* to_string(StageState state) {
    switch (state) {
        case StageState::Passed: return "passed";
        case StageState::Failed: return "failed";
        case StageState::Skipped: return "skipped";
    }
    return "unknown";
}

std::optional<PruneReason> Verdict::prune_reason() const {
    if (syntax == StageState::Failed) return PruneReason::Syntax;
    if (execution == StageState::Failed) return PruneReason::Execution;
    if (functionality == StageState::Failed) return PruneReason::Functionality;
    return std::nullopt;
}

SyntaxResult verify_syntax(const std::string& source, const std::string& grammar,
                           const std::string& interpreter_path) {
    return batch_verify_syntax({source}, grammar, interpreter_path).front();
}

std::optional<JudgeVerdict> parse_judge_verdict(const std::string& completion) {
    const auto block = extract_first_code_block(completion);
    if (!block) return std::nullopt;
    json parsed = json::parse(*block, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
    if (parsed.size() != 3 || !parsed.contains("realistic") || !parsed.contains("satisfies") ||
        !parsed.contains("rationale")) {
        return std::nullopt;
    }
    auto as_flag = [](const json& value) -> std::optional<bool> {
        if (!value.is_string()) return std::nullopt;
        std::string text = value.get<std::string>();
        std::transform(text.begin(), text.end(), text.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (text == "yes") return true;
        if (text == "no") return false;
        return std::nullopt;
    };
    const auto realistic = as_flag(parsed["realistic"]);
    const auto satisfies = as_flag(parsed["satisfies"]);
    if (!realistic || !satisfies || !parsed["rationale"].is_string()) return std::nullopt;
    return JudgeVerdict{*realistic, *satisfies, parsed["rationale"].get<std::string>()};
}

Verifier::Verifier(CompletionBackend& backend, const Sandbox& sandbox, VerifierConfig config,
                   CompletionBackend* judge_backend)
    : backend_(backend), judge_backend_(judge_backend), sandbox_(sandbox),
      config_(std::move(config)) {
    if (config_.testgen_template.empty()) config_.testgen_template = prompts::test_generation();
    if (config_.judge_template.empty()) config_.judge_template = prompts::judge();
}

SyntaxResult Verifier::verify_syntax(const std::string& solution) const {
    return forge::verify_syntax(solution, config_.grammar, sandbox_.config().interpreter_path);
}

TestSuite Verifier::generate_tests(const CandidateSample& sample) const {
    const std::string prompt = render_template(
        config_.testgen_template,
        {{"requirement", sample.requirement}, {"solution", sample.solution}});
    SamplingParams params = config_.testgen_params;
    params.n = 1;
    const std::string completion = backend_.complete(prompt, params).front();

    TestSuite suite;
    suite.generator_raw = completion;
    const std::vector<std::string> blocks = extract_all_code_blocks(completion);
    if (blocks.empty()) {
        raise(ErrorCode::NoValidTests, "test generator emitted no code blocks");
    }
    const std::vector<SyntaxResult> checks =
        batch_verify_syntax(blocks, config_.grammar, sandbox_.config().interpreter_path);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!checks[i].ok) continue;  // drop tests that fail to parse
        suite.tests.push_back(TestCase{"t" + std::to_string(suite.tests.size() + 1), blocks[i]});
    }
    if (suite.tests.empty()) {
        raise(ErrorCode::NoValidTests, "every generated test failed to parse");
    }
    return suite;
}

std::pair<bool, std::vector<std::pair<std::string, ExecOutcome>>> Verifier::verify_execution(
    const CandidateSample& sample, const TestSuite& suite) const {
    if (suite.tests.empty()) {
        raise(ErrorCode::DomainError, "test suite must hold at least one test");
    }
    bool all_passed = true;
    std::vector<std::pair<std::string, ExecOutcome>> outcomes;
    outcomes.reserve(suite.tests.size());
    for (const auto& test : suite.tests) {
        const ExecutionReport report = sandbox_.run_with_tests(sample.solution, test.source);
        outcomes.emplace_back(test.test_id, report.outcome);
        if (!report.passed()) all_passed = false;
    }
    return {all_passed, std::move(outcomes)};
}

JudgeVerdict Verifier::verify_functionality(const CandidateSample& sample) const {
    const std::string prompt =
        render_template(config_.judge_template, {{"requirement", sample.requirement},
                                                 {"solution", sample.solution}});
    CompletionBackend& judge = judge_backend_ != nullptr ? *judge_backend_ : backend_;
    SamplingParams params = config_.judge_params;
    params.n = 1;
    const int attempts = 1 + std::max(0, config_.parse_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const std::string completion = judge.complete(prompt, params).front();
        if (auto verdict = parse_judge_verdict(completion)) {
            return *verdict;
        }
    }
    raise(ErrorCode::UnparseableVerdict,
          "judge produced no parseable verdict after " + std::to_string(attempts) +
              " attempts");
}

Verdict Verifier::verify(const CandidateSample& sample) const {
    Verdict verdict;
    const SyntaxResult syntax = verify_syntax(sample.solution);
    verdict.syntax = syntax.ok ? StageState::Passed : StageState::Failed;
    verdict.syntax_diagnostic = syntax.diagnostic;
    if (!syntax.ok) return verdict;

    verdict.suite = generate_tests(sample);
    auto [all_passed, outcomes] = verify_execution(sample, verdict.suite);
    verdict.execution = all_passed ? StageState::Passed : StageState::Failed;
    verdict.test_outcomes = std::move(outcomes);
    if (!all_passed) return verdict;

    const JudgeVerdict judge = verify_functionality(sample);
    verdict.judge = judge;
    verdict.functionality =
        (judge.realistic && judge.satisfies) ? StageState::Passed : StageState::Failed;
    return verdict;
}

}  // namespace forge
