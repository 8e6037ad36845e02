#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/backend.hpp"
#include "forge/graph.hpp"
#include "forge/sandbox.hpp"

namespace forge {

struct BenchmarkInstance {
    std::string instance_id;
    std::string requirement;
    std::vector<std::string> tests;
    std::string reference_solution;
    std::vector<std::string> required_api_ids;
};

/// Loads a line-delimited benchmark file, validating the schema with precise
/// per-line diagnostics and rejecting duplicate instance ids.
std::vector<BenchmarkInstance> load_benchmark(const std::filesystem::path& path);

enum class PromptMode { Vanilla, Oracle, NaiveRag, EpiGen, Capir };

const char* to_string(PromptMode mode);
PromptMode prompt_mode_from_string(const std::string& text);  // ConfigError on unknown
bool is_rag_mode(PromptMode mode);

/// Assembles the generation prompt. Vanilla embeds the requirement only;
/// Oracle appends the specs of exactly the required APIs; RAG modes append
/// the supplied retrieval result.
std::string build_prompt(const BenchmarkInstance& instance, PromptMode mode,
                         const std::map<std::string, ApiSpec>& catalog,
                         const std::optional<std::vector<ApiSpec>>& retrieval_result);

struct InstanceScore {
    int n{0};
    int c_pass{0};
    int c_exec{0};
};

void validate(const InstanceScore& score);  // 0 <= c_pass <= c_exec <= n

/// Unbiased estimator 1 - C(n-c, k)/C(n, k), evaluated in product form so it
/// stays exact-ish and overflow-free for large n.
double pass_at_k(int n, int c, int k);
double exec_at_k(int n, int c_exec, int k);

/// Samples n candidates for the instance and classifies each one through the
/// sandbox, counting full test passes and exception-free executions.
InstanceScore score_instance(CompletionBackend& backend, const Sandbox& sandbox,
                             const BenchmarkInstance& instance, const std::string& prompt,
                             const SamplingParams& params);

struct InstanceResult {
    std::string instance_id;
    std::optional<InstanceScore> score;  // empty => unevaluated
    std::string failure;                 // infrastructure failure description
};

struct EvalReport {
    PromptMode mode{PromptMode::Vanilla};
    int n{0};
    std::vector<int> ks;
    std::vector<InstanceResult> instances;
    std::map<int, double> pass_at;
    std::map<int, double> exec_at;
    std::size_t evaluated{0};
    std::size_t unevaluated{0};
    nlohmann::json metadata;

    nlohmann::json to_json() const;
    std::string to_table() const;
    std::string to_record_lines() const;  // line-delimited report file
};

/// Mean of the per-instance estimator over evaluated instances; instances
/// that failed on infrastructure are excluded and counted, never imputed as
/// zero.
EvalReport aggregate(const std::vector<InstanceResult>& results, const std::vector<int>& ks,
                     PromptMode mode, nlohmann::json metadata = {});

/// Runs the reference solution against the instance's tests; throws
/// DomainError when it does not pass.
void verify_reference(const Sandbox& sandbox, const BenchmarkInstance& instance);

/// The joined test file used for scoring (tests run jointly per candidate).
std::string joined_tests(const BenchmarkInstance& instance);

}  // namespace forge
