#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forge/backend.hpp"
#include "forge/evolution.hpp"
#include "forge/graph.hpp"
#include "forge/sandbox.hpp"

namespace forge {

struct SyntaxResult {
    bool ok{false};
    std::string diagnostic;
};

/// Parses the source as a complete compilation unit under the target
/// language's own grammar (its AST parser, run in a subprocess). Nothing is
/// executed. Supported grammar ids: "python3", "python".
SyntaxResult verify_syntax(const std::string& source, const std::string& grammar,
                           const std::string& interpreter_path = "python3");

struct TestCase {
    std::string test_id;
    std::string source;
};

struct TestSuite {
    std::vector<TestCase> tests;
    std::string generator_raw;  // full completion, for audit
};

struct JudgeVerdict {
    bool realistic{false};
    bool satisfies{false};
    std::string rationale;
};

enum class StageState { Passed, Failed, Skipped };

const char* to_string(StageState state);

/// Outcome of multidimensional pruning for one candidate. Stages run in order
/// syntax -> execution -> functionality; a failed stage leaves the later ones
/// Skipped (recorded distinctly from a test-driven failure).
struct Verdict {
    StageState syntax{StageState::Skipped};
    StageState execution{StageState::Skipped};
    StageState functionality{StageState::Skipped};

    std::string syntax_diagnostic;
    std::vector<std::pair<std::string, ExecOutcome>> test_outcomes;
    std::optional<JudgeVerdict> judge;
    TestSuite suite;  // per-candidate, discarded after the verdict

    bool accepted() const {
        return syntax == StageState::Passed && execution == StageState::Passed &&
               functionality == StageState::Passed;
    }
    std::optional<PruneReason> prune_reason() const;
};

struct VerifierConfig {
    std::string grammar{"python3"};
    std::string testgen_template;  // defaults to prompts::test_generation()
    std::string judge_template;    // defaults to prompts::judge()
    SamplingParams testgen_params{};
    SamplingParams judge_params{};
    int parse_retries{3};
};

/// Composes the three validators of multidimensional graph pruning. The same
/// backend that synthesized a sample judges it by default; a distinct judge
/// endpoint may be supplied.
class Verifier {
public:
    Verifier(CompletionBackend& backend, const Sandbox& sandbox, VerifierConfig config = {},
             CompletionBackend* judge_backend = nullptr);

    SyntaxResult verify_syntax(const std::string& solution) const;

    /// Asks the backend for unit tests covering the sample; tests that fail
    /// to parse are dropped. Throws NoValidTests when none survive.
    TestSuite generate_tests(const CandidateSample& sample) const;

    /// Runs every test against the solution in the sandbox. First element is
    /// true iff all tests passed.
    std::pair<bool, std::vector<std::pair<std::string, ExecOutcome>>> verify_execution(
        const CandidateSample& sample, const TestSuite& suite) const;

    /// LLM-as-a-judge check of requirement realism and solution intent.
    /// Re-prompts on unparseable output, then throws UnparseableVerdict.
    JudgeVerdict verify_functionality(const CandidateSample& sample) const;

    /// Full pipeline with short-circuiting. Infrastructure errors propagate;
    /// they are never folded into a false verdict.
    Verdict verify(const CandidateSample& sample) const;

private:
    CompletionBackend& backend_;
    CompletionBackend* judge_backend_;
    const Sandbox& sandbox_;
    VerifierConfig config_;
};

/// Extracts a judge verdict from a completion: the first fenced block must
/// hold a JSON object with exactly the fields {realistic, satisfies,
/// rationale}, realistic/satisfies in {"yes","no"}.
std::optional<JudgeVerdict> parse_judge_verdict(const std::string& completion);

}  // namespace forge
