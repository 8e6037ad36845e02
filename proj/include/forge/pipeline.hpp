#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/backend.hpp"
#include "forge/embed.hpp"
#include "forge/eval.hpp"
#include "forge/evolution.hpp"
#include "forge/graph.hpp"
#include "forge/prompts.hpp"
#include "forge/sandbox.hpp"

namespace forge {

struct PipelineConfig {
    std::filesystem::path catalog_path;
    std::string library_name;
    std::size_t target_size{1};
    std::uint64_t seed{0};
    RatioSchedule schedule{};

    std::string backend_kind{"http"};  // "http" | "mock"
    BackendConfig backend{};
    std::filesystem::path mock_script_path;

    SamplingParams synthesis_params{};
    std::size_t seed_apis_max{4};
    int parse_retries{3};

    SandboxConfig sandbox{};
    std::string grammar{"python3"};

    std::filesystem::path checkpoint_path{"forge-checkpoint.jsonl"};
    std::filesystem::path export_path{"forge-dataset.jsonl"};
    std::size_t checkpoint_interval{100};
    std::size_t max_attempts_factor{20};

    std::size_t retrieval_k{5};
    std::size_t k_per_subtask{3};
    std::size_t rerank_top_m{5};
    std::string embed_kind{"http"};  // "http" | "hash"
    EmbedConfig embed{};
    std::filesystem::path index_path;

    SamplingParams eval_params{0.5, 0.95, 10, 2048};
    std::vector<int> eval_ks{1, 3, 5};

    std::optional<std::filesystem::path> init_template_path;
    std::optional<std::filesystem::path> iter_template_path;
    std::optional<std::filesystem::path> testgen_template_path;
    std::optional<std::filesystem::path> judge_template_path;

    void validate() const;  // throws ConfigError
};

/// Parses a JSON config file. Relative paths are resolved against the config
/// file's directory.
PipelineConfig load_config(const std::filesystem::path& path);

/// Builds a backend from the config: a scripted mock (offline) or the HTTP
/// client.
std::unique_ptr<CompletionBackend> make_backend(const PipelineConfig& config);

/// Loads a mock script file: {"rules": [{"match": ..., "responses": [...]}]}.
std::vector<MockBackend::Rule> load_mock_script(const std::filesystem::path& path);

struct RunReport {
    GraphStats stats;
    std::size_t attempts{0};
    std::size_t duplicates_rejected{0};
    std::size_t discarded_attempts{0};  // malformed completions, unusable suites/verdicts
    bool completed{false};

    nlohmann::json to_json() const;
};

/// Drives the synthesize -> prune loop until the retained count reaches the
/// target, with periodic checkpoints; resumes from an existing checkpoint.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config,
                      std::unique_ptr<CompletionBackend> backend_override = nullptr,
                      std::unique_ptr<EmbedClient> embed_override = nullptr);

    RunReport synthesize();

    /// Exports the retained samples of the current checkpoint; returns the
    /// record count.
    std::size_t export_dataset(const std::optional<std::filesystem::path>& out = std::nullopt);

    EvalReport evaluate(const std::filesystem::path& benchmark_path, PromptMode mode,
                        const std::vector<int>& ks,
                        const std::optional<std::filesystem::path>& report_out = std::nullopt);

    const PipelineConfig& config() const { return config_; }
    std::shared_ptr<AuditLog> audit_log() const { return audit_; }

private:
    PipelineConfig config_;
    std::unique_ptr<CompletionBackend> backend_;
    std::unique_ptr<EmbedClient> embed_;
    std::shared_ptr<AuditLog> audit_;
    PromptTemplate init_template_;
    PromptTemplate iter_template_;
};

/// Summarizes a checkpoint: counts, pruning breakdown, ratio attainment.
nlohmann::json inspect_checkpoint(const std::filesystem::path& checkpoint_path);
std::string inspect_to_text(const nlohmann::json& summary);

}  // namespace forge
