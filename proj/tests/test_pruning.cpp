#include <doctest.h>

#include "forge/error.hpp"
#include "forge/pruning.hpp"
#include "test_support.hpp"

using namespace forge;

namespace {

const std::string kGoodSolution = "def double(x):\n    return x * 2\n";
const std::string kGoodTest = "```python\nassert double(2) == 4\n```\n";
const std::string kFailingTest = "```python\nassert double(2) == 5\n```\n";
const std::string kYesYes =
    "```json\n{\"realistic\": \"yes\", \"satisfies\": \"yes\", \"rationale\": \"fine\"}\n```\n";
const std::string kYesNo =
    "```json\n{\"realistic\": \"yes\", \"satisfies\": \"no\", \"rationale\": \"off\"}\n```\n";

CandidateSample sample_with(const std::string& solution) {
    return CandidateSample{"double a number", solution, "raw"};
}

}  // namespace

TEST_CASE("verify_syntax accepts well-formed units and pinpoints errors") {
    const SyntaxResult good = verify_syntax("def f(x):\n    return x\n", "python3");
    CHECK(good.ok);

    const SyntaxResult bad = verify_syntax("def f(x):\n    return [1, 2\n", "python3");
    CHECK_FALSE(bad.ok);
    CHECK(bad.diagnostic.find("line") != std::string::npos);

    const SyntaxResult empty = verify_syntax("", "python3");
    CHECK_FALSE(empty.ok);

    try {
        (void)verify_syntax("x = 1", "cobol");
        FAIL("expected UnsupportedGrammar");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedGrammar);
    }
}

TEST_CASE("generate_tests keeps parseable tests and drops the rest") {
    Sandbox sandbox(test::sandbox_config());

    MockBackend three({{"", {"```python\nassert double(1) == 2\n```\n"
                             "```python\nassert double(0) == 0\n```\n"
                             "```python\nassert double(-1) == -2\n```\n"}}});
    Verifier verifier(three, sandbox);
    const TestSuite suite = verifier.generate_tests(sample_with(kGoodSolution));
    CHECK(suite.tests.size() == 3);
    CHECK(suite.tests[0].test_id == "t1");
    CHECK_FALSE(suite.generator_raw.empty());

    MockBackend mixed({{"", {"```python\nassert double(1) == 2\n```\n"
                             "```python\nassert double(2 == 4\n```\n"  // malformed
                             "```python\nassert double(3) == 6\n```\n"}}});
    Verifier verifier2(mixed, sandbox);
    CHECK(verifier2.generate_tests(sample_with(kGoodSolution)).tests.size() == 2);

    MockBackend hopeless({{"", {"```python\nassert double(2 == \n```\n"}}});
    Verifier verifier3(hopeless, sandbox);
    try {
        (void)verifier3.generate_tests(sample_with(kGoodSolution));
        FAIL("expected NoValidTests");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoValidTests);
    }
}

TEST_CASE("verify_execution reports per-test outcomes") {
    Sandbox sandbox(test::sandbox_config());
    MockBackend backend({{"", {"unused"}}});
    Verifier verifier(backend, sandbox);

    TestSuite suite;
    suite.tests = {{"t1", "assert double(2) == 4"},
                   {"t2", "assert double(2) == 5"},
                   {"t3", "double('a', 'b')"}};
    auto [all_passed, outcomes] = verifier.verify_execution(sample_with(kGoodSolution), suite);
    CHECK_FALSE(all_passed);
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].second == ExecOutcome::Passed);
    CHECK(outcomes[1].second == ExecOutcome::AssertionFailed);
    CHECK(outcomes[2].second == ExecOutcome::RuntimeError);

    TestSuite passing;
    passing.tests = {{"t1", "assert double(2) == 4"}, {"t2", "assert double(0) == 0"}};
    CHECK(verifier.verify_execution(sample_with(kGoodSolution), passing).first);
}

TEST_CASE("verify_execution surfaces timeouts as failing outcomes") {
    SandboxConfig config = test::sandbox_config();
    config.default_limits.time_limit = std::chrono::milliseconds(600);
    Sandbox sandbox(config);
    MockBackend backend({{"", {"unused"}}});
    Verifier verifier(backend, sandbox);

    TestSuite suite;
    suite.tests = {{"t1", "while True:\n    pass"}};
    auto [all_passed, outcomes] =
        verifier.verify_execution(sample_with(kGoodSolution), suite);
    CHECK_FALSE(all_passed);
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0].second == ExecOutcome::Timeout);
}

TEST_CASE("verify_functionality is the conjunction of both rubric items") {
    Sandbox sandbox(test::sandbox_config());

    MockBackend yes({{"", {kYesYes}}});
    Verifier v1(yes, sandbox);
    const JudgeVerdict verdict = v1.verify_functionality(sample_with(kGoodSolution));
    CHECK(verdict.realistic);
    CHECK(verdict.satisfies);
    CHECK(verdict.rationale == "fine");

    MockBackend half({{"", {kYesNo}}});
    Verifier v2(half, sandbox);
    const JudgeVerdict no = v2.verify_functionality(sample_with(kGoodSolution));
    CHECK(no.realistic);
    CHECK_FALSE(no.satisfies);
}

TEST_CASE("unparseable judge output is re-prompted then rejected") {
    Sandbox sandbox(test::sandbox_config());
    MockBackend vague({{"", {"looks good to me!", "sure", "yep", "fine", "ok"}}});
    Verifier verifier(vague, sandbox);
    try {
        (void)verifier.verify_functionality(sample_with(kGoodSolution));
        FAIL("expected UnparseableVerdict");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnparseableVerdict);
    }

    // recovery within the retry budget
    MockBackend healing({{"", {"free text", kYesYes}}});
    Verifier v2(healing, sandbox);
    CHECK(v2.verify_functionality(sample_with(kGoodSolution)).satisfies);
}

TEST_CASE("judge verdict wire format is strict") {
    CHECK(parse_judge_verdict(kYesYes).has_value());
    CHECK_FALSE(parse_judge_verdict("no block at all").has_value());
    CHECK_FALSE(parse_judge_verdict("```json\n{\"realistic\": \"yes\"}\n```").has_value());
    CHECK_FALSE(parse_judge_verdict("```json\n{\"realistic\": \"maybe\", \"satisfies\": "
                                    "\"yes\", \"rationale\": \"r\"}\n```")
                    .has_value());
    // extra fields are rejected: the record must hold exactly the three
    CHECK_FALSE(parse_judge_verdict("```json\n{\"realistic\": \"yes\", \"satisfies\": "
                                    "\"yes\", \"rationale\": \"r\", \"extra\": 1}\n```")
                    .has_value());
}

TEST_CASE("verify composes the three stages with short-circuiting") {
    Sandbox sandbox(test::sandbox_config());

    SUBCASE("all stages pass") {
        MockBackend backend({{"unit tests", {kGoodTest}}, {"Assess", {kYesYes}}});
        Verifier verifier(backend, sandbox);
        const Verdict verdict = verifier.verify(sample_with(kGoodSolution));
        CHECK(verdict.accepted());
        CHECK(verdict.prune_reason() == std::nullopt);
    }

    SUBCASE("syntax failure short-circuits with zero sandbox calls") {
        MockBackend backend({{"", {"never used"}}});
        Verifier verifier(backend, sandbox);
        const auto runs_before = sandbox.run_count();
        const Verdict verdict = verifier.verify(sample_with("def broken(:\n"));
        CHECK_FALSE(verdict.accepted());
        CHECK(verdict.syntax == StageState::Failed);
        CHECK(verdict.execution == StageState::Skipped);
        CHECK(verdict.functionality == StageState::Skipped);
        CHECK(verdict.prune_reason() == PruneReason::Syntax);
        CHECK(sandbox.run_count() == runs_before);
    }

    SUBCASE("failing assertion prunes for execution") {
        MockBackend backend({{"unit tests", {kFailingTest}}, {"Assess", {kYesYes}}});
        Verifier verifier(backend, sandbox);
        const Verdict verdict = verifier.verify(sample_with(kGoodSolution));
        CHECK_FALSE(verdict.accepted());
        CHECK(verdict.syntax == StageState::Passed);
        CHECK(verdict.execution == StageState::Failed);
        CHECK(verdict.functionality == StageState::Skipped);
        CHECK(verdict.prune_reason() == PruneReason::Execution);
    }

    SUBCASE("judge rejection prunes for functionality") {
        MockBackend backend({{"unit tests", {kGoodTest}}, {"Assess", {kYesNo}}});
        Verifier verifier(backend, sandbox);
        const Verdict verdict = verifier.verify(sample_with(kGoodSolution));
        CHECK_FALSE(verdict.accepted());
        CHECK(verdict.functionality == StageState::Failed);
        CHECK(verdict.prune_reason() == PruneReason::Functionality);
    }
}

TEST_CASE("verify is deterministic given a deterministic backend") {
    Sandbox sandbox(test::sandbox_config());
    for (int round = 0; round < 2; ++round) {
        MockBackend backend({{"unit tests", {kGoodTest}}, {"Assess", {kYesYes}}});
        Verifier verifier(backend, sandbox);
        const Verdict first = verifier.verify(sample_with(kGoodSolution));
        MockBackend backend2({{"unit tests", {kGoodTest}}, {"Assess", {kYesYes}}});
        Verifier verifier2(backend2, sandbox);
        const Verdict second = verifier2.verify(sample_with(kGoodSolution));
        CHECK(first.accepted() == second.accepted());
        CHECK(first.syntax == second.syntax);
        CHECK(first.execution == second.execution);
        CHECK(first.functionality == second.functionality);
    }
}

TEST_CASE("accepted verdicts survive a fresh re-verification of their suite") {
    Sandbox sandbox(test::sandbox_config());
    MockBackend backend({{"unit tests", {kGoodTest}}, {"Assess", {kYesYes}}});
    Verifier verifier(backend, sandbox);
    const CandidateSample sample = sample_with(kGoodSolution);
    const Verdict verdict = verifier.verify(sample);
    REQUIRE(verdict.accepted());
    CHECK(forge::verify_syntax(sample.solution, "python3").ok);
    Sandbox fresh(test::sandbox_config());
    for (const auto& test : verdict.suite.tests) {
        CHECK(fresh.run_with_tests(sample.solution, test.source).passed());
    }
}

TEST_CASE("infrastructure failures propagate instead of becoming verdicts") {
    // sandbox missing: the error surfaces, no false 'failed execution'
    SandboxConfig broken = test::sandbox_config();
    broken.interpreter_path = "missing-python";
    Sandbox bad_sandbox(broken);
    MockBackend backend({{"unit tests", {kGoodTest}}, {"Assess", {kYesYes}}});
    Verifier verifier(backend, bad_sandbox);
    try {
        (void)verifier.verify(sample_with(kGoodSolution));
        FAIL("expected SandboxUnavailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SandboxUnavailable);
        CHECK(is_infrastructure_error(e.code()));
    }

    // backend without a matching rule: UnscriptedPrompt propagates
    Sandbox sandbox(test::sandbox_config());
    MockBackend silent({{"no-match-ever", {"x"}}});
    Verifier v2(silent, sandbox);
    try {
        (void)v2.verify(sample_with(kGoodSolution));
        FAIL("expected UnscriptedPrompt");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnscriptedPrompt);
        CHECK(is_infrastructure_error(e.code()));
    }
}

TEST_CASE("a distinct judge backend is honored when configured") {
    Sandbox sandbox(test::sandbox_config());
    MockBackend synthesizer({{"unit tests", {kGoodTest}}});
    MockBackend judge({{"Assess", {kYesNo}}});
    Verifier verifier(synthesizer, sandbox, VerifierConfig{}, &judge);
    const Verdict verdict = verifier.verify(sample_with(kGoodSolution));
    CHECK(verdict.functionality == StageState::Failed);
}
