#include <doctest.h>

#include "forge/error.hpp"
#include "forge/evolution.hpp"
#include "forge/rng.hpp"
#include "test_support.hpp"

using namespace forge;

TEST_CASE("parse_candidate extracts marked requirement and first block") {
    auto candidate = parse_candidate("Requirement: sum arrays\n```\ncode\n```\n");
    CHECK(candidate.requirement == "sum arrays");
    CHECK(candidate.solution == "code");

    // prose before the fence works when no marker is present
    auto prose = parse_candidate("add two numbers please\n```python\ndef f(): pass\n```");
    CHECK(prose.requirement == "add two numbers please");
    CHECK(prose.solution == "def f(): pass");
}

TEST_CASE("parse_candidate takes the first of several blocks and keeps raw text") {
    const std::string raw =
        "Requirement: two blocks\n```python\nfirst\n```\ntrailing\n```python\nsecond\n```\n";
    auto candidate = parse_candidate(raw);
    CHECK(candidate.solution == "first");
    CHECK(candidate.raw_completion == raw);
    CHECK(extract_all_code_blocks(raw).size() == 2);
}

TEST_CASE("parse_candidate rejects malformed completions") {
    for (const char* bad : {"", "no blocks here", "Requirement: empty block\n```\n```\n",
                            "```\ncode without requirement\n```"}) {
        try {
            (void)parse_candidate(bad);
            FAIL("expected MalformedCompletion for: ", bad);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MalformedCompletion);
        }
    }
}

TEST_CASE("parse_candidate is idempotent through serialization") {
    rng::SplitMix rng(2024);
    for (int i = 0; i < 50; ++i) {
        CandidateSample original;
        original.requirement = "task number " + std::to_string(rng.next() % 1000);
        original.solution = "def f_" + std::to_string(i) + "(x):\n    return {\"k\": x}";
        const CandidateSample reparsed = parse_candidate(serialize_candidate(original));
        CHECK(reparsed.requirement == original.requirement);
        CHECK(reparsed.solution == original.solution);
        const CandidateSample again = parse_candidate(serialize_candidate(reparsed));
        CHECK(again.requirement == reparsed.requirement);
        CHECK(again.solution == reparsed.solution);
    }
}

TEST_CASE("normalize_requirement collapses whitespace only") {
    CHECK(normalize_requirement("  sum\n\tarrays  fast ") == "sum arrays fast");
    CHECK(normalize_requirement("sum arrays fast") == "sum arrays fast");
    CHECK(normalize_requirement("Sum") != normalize_requirement("sum"));
}

TEST_CASE("evolve_initial embeds every seed spec and parses the mock reply") {
    auto seeds = test::make_catalog(3);
    MockBackend backend({{"", {test::completion_for("mock task", "def f():\n    return 1")}}});
    const PromptTemplate tpl = prompts::default_init_instruction();

    const std::string prompt = render_initial_prompt(seeds, tpl);
    for (const auto& seed : seeds) {
        CHECK(prompt.find(seed.signature) != std::string::npos);
        CHECK(prompt.find(seed.description) != std::string::npos);
    }

    auto candidate = evolve_initial(backend, seeds, tpl, SamplingParams{});
    CHECK(candidate.requirement == "mock task");
    CHECK(candidate.solution == "def f():\n    return 1");
}

TEST_CASE("evolve_initial retries malformed completions then fails") {
    auto seeds = test::make_catalog(2);
    MockBackend backend({{"", {"nonsense", "still nonsense", "more nonsense", "junk"}}});
    try {
        (void)evolve_initial(backend, seeds, prompts::default_init_instruction(),
                             SamplingParams{}, 3);
        FAIL("expected MalformedCompletion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedCompletion);
    }

    // a malformed reply followed by a good one succeeds within the retry budget
    MockBackend healing(
        {{"", {"nonsense", test::completion_for("recovered", "def g():\n    return 2")}}});
    auto candidate = evolve_initial(healing, seeds, prompts::default_init_instruction(),
                                    SamplingParams{}, 3);
    CHECK(candidate.requirement == "recovered");
}

TEST_CASE("evolve_initial validates inputs") {
    MockBackend backend(std::vector<MockBackend::Rule>{{"", {"x"}}});
    CHECK_THROWS_AS((void)evolve_initial(backend, {}, prompts::default_init_instruction(),
                                         SamplingParams{}),
                    Error);
    CHECK_THROWS_AS((void)evolve_initial(backend, test::make_catalog(1),
                                         prompts::default_iter_instruction(), SamplingParams{}),
                    Error);
}

TEST_CASE("evolve_iterative embeds both parents verbatim and merges") {
    SampleNode a;
    a.node_id = 1;
    a.requirement = "first parent requirement";
    a.solution = "def a(): pass";
    SampleNode b;
    b.node_id = 2;
    b.requirement = "second parent requirement";
    b.solution = "def b(): pass";
    const std::vector<const SampleNode*> parents{&a, &b};

    const PromptTemplate tpl = prompts::default_iter_instruction();
    const std::string prompt = render_iterative_prompt(parents, tpl);
    CHECK(prompt.find("first parent requirement") != std::string::npos);
    CHECK(prompt.find("second parent requirement") != std::string::npos);
    CHECK(prompt.find("def a(): pass") != std::string::npos);

    MockBackend backend({{"", {test::completion_for("merged requirement", "def m(): pass")}}});
    auto merged = evolve_iterative(backend, parents, tpl, SamplingParams{});
    CHECK(merged.requirement == "merged requirement");

    // m = 1 violates the arity precondition
    const std::vector<const SampleNode*> single{&a};
    CHECK_THROWS_AS((void)evolve_iterative(backend, single, tpl, SamplingParams{}), Error);
}

TEST_CASE("schedule_next follows the bootstrap and ratio rules") {
    RatioSchedule schedule;  // 1:2, min pool 50
    schedule.validate();

    GraphStats stats;
    CHECK(schedule_next(stats, schedule) == EvolutionKind::Initial);  // bootstrap

    stats.retained_initial = 60;
    stats.retained_iterative = 100;  // 100 < 120
    CHECK(schedule_next(stats, schedule) == EvolutionKind::Iterative);

    stats.retained_iterative = 120;  // tie resolves Initial
    CHECK(schedule_next(stats, schedule) == EvolutionKind::Initial);

    stats.retained_initial = 10;  // below the pool regardless of ratio
    stats.retained_iterative = 0;
    CHECK(schedule_next(stats, schedule) == EvolutionKind::Initial);
}

TEST_CASE("schedule keeps the 1:2 mix under an all-accepting pipeline") {
    // simulate retention always succeeding; check the mix at every
    // cycle-aligned total and the worst-case deficit in between
    RatioSchedule schedule;
    schedule.min_initial_pool = 50;
    GraphStats stats;
    std::size_t worst_deficit = 0;
    const std::size_t bootstrap_total =
        schedule.min_initial_pool * (1 + schedule.target_iter / schedule.target_init);
    for (int step = 0; step < 900; ++step) {
        if (schedule_next(stats, schedule) == EvolutionKind::Initial) {
            ++stats.retained_initial;
        } else {
            ++stats.retained_iterative;
        }
        const std::size_t total = stats.retained_total();
        if (total < bootstrap_total) continue;
        const auto deficit = std::llabs(static_cast<long long>(stats.retained_iterative) -
                                        2LL * static_cast<long long>(stats.retained_initial));
        worst_deficit = std::max<std::size_t>(worst_deficit, static_cast<std::size_t>(deficit));
        if ((total - bootstrap_total) % 3 == 0) {
            CHECK(deficit <= 1);
        }
    }
    CHECK(worst_deficit <= 2);
}

TEST_CASE("ratio schedule validation") {
    RatioSchedule bad;
    bad.target_init = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = RatioSchedule{};
    bad.min_initial_pool = 2;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("templates with missing placeholders are rejected") {
    CHECK_THROWS_AS((void)make_template(TemplateKind::InitInstruction, "no placeholder"),
                    Error);
    CHECK_THROWS_AS((void)make_template(TemplateKind::IterInstruction, "{{api_specs}}"),
                    Error);
    CHECK_NOTHROW((void)make_template(TemplateKind::InitInstruction, "x {{api_specs}} y"));
}

TEST_CASE("render_template leaves literal braces in code untouched") {
    const std::string out =
        render_template("a {{key}} b {{unknown}} c {{}}", {{"key", "VALUE"}});
    CHECK(out == "a VALUE b {{unknown}} c {{}}");
}
