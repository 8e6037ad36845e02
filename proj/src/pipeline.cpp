#include "forge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "forge/error.hpp"
#include "forge/graph_io.hpp"
#include "forge/pruning.hpp"
#include "forge/retrieval.hpp"
#include "forge/rng.hpp"

namespace forge {

using nlohmann::json;

namespace {

// rng stream ids, one per decision the loop makes per attempt
constexpr std::uint64_t kStreamSeedCount = 1;
constexpr std::uint64_t kStreamSeedSubset = 2;
constexpr std::uint64_t kStreamParentCount = 3;
constexpr std::uint64_t kStreamParentSubset = 4;

std::filesystem::path resolve_relative(const std::filesystem::path& base,
                                       const std::filesystem::path& path) {
    if (path.empty() || path.is_absolute()) return path;
    // absolute so later cwd changes (sandbox jails) cannot re-anchor it
    return std::filesystem::absolute(base / path).lexically_normal();
}

std::string read_text_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::ConfigError,
              std::string("cannot open ") + what + " '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

SamplingParams sampling_from_json(const json& value, SamplingParams defaults) {
    SamplingParams params = defaults;
    params.temperature = value.value("temperature", params.temperature);
    params.top_p = value.value("top_p", params.top_p);
    params.n = value.value("n", params.n);
    params.max_tokens = value.value("max_tokens", params.max_tokens);
    return params;
}

}  // namespace

void PipelineConfig::validate() const {
    if (catalog_path.empty()) {
        raise(ErrorCode::ConfigError, "catalog_path is required");
    }
    if (!std::filesystem::exists(catalog_path)) {
        raise(ErrorCode::ConfigError, "catalog_path '" + catalog_path.string() + "' not found");
    }
    if (target_size < 1) {
        raise(ErrorCode::ConfigError, "target_size must be >= 1");
    }
    try {
        schedule.validate();
        forge::validate(synthesis_params);
        forge::validate(eval_params);
    } catch (const Error& e) {
        raise(ErrorCode::ConfigError, e.what());
    }
    if (backend_kind != "http" && backend_kind != "mock") {
        raise(ErrorCode::ConfigError, "backend.kind must be 'http' or 'mock'");
    }
    if (backend_kind == "mock" && !std::filesystem::exists(mock_script_path)) {
        raise(ErrorCode::ConfigError,
              "mock backend needs an existing backend.mock_script_path (got '" +
                  mock_script_path.string() + "')");
    }
    if (embed_kind != "http" && embed_kind != "hash") {
        raise(ErrorCode::ConfigError, "retrieval.embed_kind must be 'http' or 'hash'");
    }
    if (seed_apis_max < 1) {
        raise(ErrorCode::ConfigError, "evolution.seed_apis_max must be >= 1");
    }
    if (checkpoint_path.empty() || export_path.empty()) {
        raise(ErrorCode::ConfigError, "checkpoint_path and export_path are required");
    }
    if (eval_ks.empty()) {
        raise(ErrorCode::ConfigError, "evaluation.ks must list at least one k");
    }
    for (const auto& path : {init_template_path, iter_template_path, testgen_template_path,
                             judge_template_path}) {
        if (path && !std::filesystem::exists(*path)) {
            raise(ErrorCode::ConfigError, "template file '" + path->string() + "' not found");
        }
    }
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::ConfigError, "cannot open config '" + path.string() + "'");
    }
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        raise(ErrorCode::ConfigError, "config '" + path.string() + "' is not a JSON object");
    }
    const std::filesystem::path base = path.has_parent_path()
                                           ? path.parent_path()
                                           : std::filesystem::path(".");

    PipelineConfig config;
    if (!root.contains("catalog_path")) {
        raise(ErrorCode::ConfigError, "config needs catalog_path");
    }
    config.catalog_path = resolve_relative(base, root["catalog_path"].get<std::string>());
    config.library_name = root.value("library_name", config.catalog_path.stem().string());
    if (!root.contains("target_size")) {
        raise(ErrorCode::ConfigError, "config needs target_size");
    }
    config.target_size = root["target_size"].get<std::size_t>();
    config.seed = root.value("seed", std::uint64_t{0});

    if (root.contains("schedule")) {
        const json& s = root["schedule"];
        config.schedule.target_init = s.value("target_init", config.schedule.target_init);
        config.schedule.target_iter = s.value("target_iter", config.schedule.target_iter);
        config.schedule.min_initial_pool =
            s.value("min_initial_pool", config.schedule.min_initial_pool);
    }

    if (root.contains("backend")) {
        const json& b = root["backend"];
        config.backend_kind = b.value("kind", config.backend_kind);
        config.backend.endpoint = b.value("endpoint", config.backend.endpoint);
        config.backend.model_name = b.value("model_name", config.backend.model_name);
        config.backend.auth_env = b.value("auth_env", config.backend.auth_env);
        config.backend.timeout =
            std::chrono::milliseconds(b.value("timeout_ms", config.backend.timeout.count()));
        config.backend.max_retries = b.value("max_retries", config.backend.max_retries);
        config.backend.in_flight_limit =
            b.value("in_flight_limit", config.backend.in_flight_limit);
        config.backend.retry_backoff = std::chrono::milliseconds(
            b.value("retry_backoff_ms", config.backend.retry_backoff.count()));
        if (b.contains("mock_script_path")) {
            config.mock_script_path =
                resolve_relative(base, b["mock_script_path"].get<std::string>());
        }
    }

    if (root.contains("sampling")) {
        config.synthesis_params = sampling_from_json(root["sampling"], config.synthesis_params);
        config.synthesis_params.n = 1;
    }
    if (root.contains("evolution")) {
        const json& e = root["evolution"];
        config.seed_apis_max = e.value("seed_apis_max", config.seed_apis_max);
        config.parse_retries = e.value("parse_retries", config.parse_retries);
    }
    if (root.contains("sandbox")) {
        const json& s = root["sandbox"];
        config.sandbox.interpreter_path =
            s.value("interpreter_path", config.sandbox.interpreter_path);
        config.sandbox.default_limits.time_limit = std::chrono::milliseconds(
            s.value("time_limit_ms", config.sandbox.default_limits.time_limit.count()));
        config.sandbox.default_limits.memory_limit_mib =
            s.value("memory_limit_mib", config.sandbox.default_limits.memory_limit_mib);
        config.sandbox.workers = s.value("workers", config.sandbox.workers);
        config.sandbox.allow_network = s.value("allow_network", config.sandbox.allow_network);
        if (s.contains("pythonpath")) {
            for (const auto& entry : s["pythonpath"]) {
                config.sandbox.pythonpath.push_back(
                    resolve_relative(base, entry.get<std::string>()).string());
            }
        }
    }
    config.grammar = root.value("grammar", config.grammar);
    if (root.contains("checkpoint_path")) {
        config.checkpoint_path = resolve_relative(base, root["checkpoint_path"].get<std::string>());
    }
    if (root.contains("export_path")) {
        config.export_path = resolve_relative(base, root["export_path"].get<std::string>());
    }
    config.checkpoint_interval = root.value("checkpoint_interval", config.checkpoint_interval);
    config.max_attempts_factor = root.value("max_attempts_factor", config.max_attempts_factor);

    if (root.contains("retrieval")) {
        const json& r = root["retrieval"];
        config.retrieval_k = r.value("k", config.retrieval_k);
        config.k_per_subtask = r.value("k_per_subtask", config.k_per_subtask);
        config.rerank_top_m = r.value("rerank_top_m", config.rerank_top_m);
        config.embed_kind = r.value("embed_kind", config.embed_kind);
        config.embed.endpoint = r.value("embed_endpoint", config.embed.endpoint);
        config.embed.model_name = r.value("embed_model", config.embed.model_name);
        if (r.contains("index_path") && !r["index_path"].get<std::string>().empty()) {
            config.index_path = resolve_relative(base, r["index_path"].get<std::string>());
        }
    }
    if (root.contains("evaluation")) {
        config.eval_params = sampling_from_json(root["evaluation"], config.eval_params);
        if (root["evaluation"].contains("ks")) {
            config.eval_ks = root["evaluation"]["ks"].get<std::vector<int>>();
        }
    }
    if (root.contains("templates")) {
        const json& t = root["templates"];
        auto set_path = [&](const char* key, std::optional<std::filesystem::path>& out) {
            if (t.contains(key)) out = resolve_relative(base, t[key].get<std::string>());
        };
        set_path("init_path", config.init_template_path);
        set_path("iter_path", config.iter_template_path);
        set_path("testgen_path", config.testgen_template_path);
        set_path("judge_path", config.judge_template_path);
    }

    config.validate();
    return config;
}

std::vector<MockBackend::Rule> load_mock_script(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::ConfigError, "cannot open mock script '" + path.string() + "'");
    }
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded() || !root.contains("rules") || !root["rules"].is_array()) {
        raise(ErrorCode::ConfigError,
              "mock script must be a JSON object with a 'rules' array");
    }
    std::vector<MockBackend::Rule> rules;
    for (const auto& entry : root["rules"]) {
        MockBackend::Rule rule;
        rule.matcher = entry.value("match", "");
        if (!entry.contains("responses") || !entry["responses"].is_array() ||
            entry["responses"].empty()) {
            raise(ErrorCode::ConfigError,
                  "mock rule '" + rule.matcher + "' needs a non-empty responses array");
        }
        for (const auto& response : entry["responses"]) {
            rule.responses.push_back(response.get<std::string>());
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::unique_ptr<CompletionBackend> make_backend(const PipelineConfig& config) {
    if (config.backend_kind == "mock") {
        return std::make_unique<MockBackend>(load_mock_script(config.mock_script_path),
                                             config.backend.in_flight_limit);
    }
    return make_http_backend(config.backend);
}

json RunReport::to_json() const {
    return json{{"retained_initial", stats.retained_initial},
                {"retained_iterative", stats.retained_iterative},
                {"retained_total", stats.retained_total()},
                {"pruned", json{{"syntax", stats.pruned_syntax},
                                {"execution", stats.pruned_execution},
                                {"functionality", stats.pruned_functionality}}},
                {"candidates_pending", stats.candidates},
                {"attempts", attempts},
                {"duplicates_rejected", duplicates_rejected},
                {"discarded_attempts", discarded_attempts},
                {"completed", completed}};
}

Pipeline::Pipeline(PipelineConfig config, std::unique_ptr<CompletionBackend> backend_override,
                   std::unique_ptr<EmbedClient> embed_override)
    : config_(std::move(config)), audit_(std::make_shared<AuditLog>()) {
    config_.validate();
    backend_ = backend_override ? std::move(backend_override) : make_backend(config_);
    backend_->set_audit_log(audit_);
    if (embed_override) {
        embed_ = std::move(embed_override);
    } else if (config_.embed_kind == "hash") {
        embed_ = std::make_unique<HashEmbedClient>();
    }
    // http embed client is built lazily; evaluate() may never need it

    init_template_ = config_.init_template_path
                         ? load_template_file(TemplateKind::InitInstruction,
                                              *config_.init_template_path)
                         : prompts::default_init_instruction();
    iter_template_ = config_.iter_template_path
                         ? load_template_file(TemplateKind::IterInstruction,
                                              *config_.iter_template_path)
                         : prompts::default_iter_instruction();
}

RunReport Pipeline::synthesize() {
    const std::vector<ApiSpec> catalog = graph_io::load_catalog(config_.catalog_path);

    std::optional<SynthesisGraph> graph;
    std::size_t attempts = 0;
    std::size_t duplicates = 0;
    std::size_t discarded = 0;

    if (std::filesystem::exists(config_.checkpoint_path)) {
        graph_io::LoadedCheckpoint loaded = graph_io::load_checkpoint(config_.checkpoint_path);
        if (loaded.graph.library_name() != config_.library_name) {
            raise(ErrorCode::ConfigError,
                  "checkpoint belongs to library '" + loaded.graph.library_name() +
                      "', config says '" + config_.library_name + "'");
        }
        if (loaded.graph.api_nodes().size() != catalog.size()) {
            raise(ErrorCode::ConfigError, "checkpoint catalog differs from configured catalog");
        }
        if (loaded.pipeline_state.is_object()) {
            const json& state = loaded.pipeline_state;
            if (state.contains("seed") && state["seed"].get<std::uint64_t>() != config_.seed) {
                raise(ErrorCode::ConfigError,
                      "checkpoint was produced with a different seed; refusing to resume");
            }
            attempts = state.value("attempts", std::size_t{0});
            duplicates = state.value("duplicates_rejected", std::size_t{0});
            discarded = state.value("discarded_attempts", std::size_t{0});
        }
        graph = std::move(loaded.graph);
    } else {
        graph.emplace(catalog, config_.library_name);
    }

    Sandbox sandbox(config_.sandbox);
    VerifierConfig verifier_config;
    verifier_config.grammar = config_.grammar;
    verifier_config.parse_retries = config_.parse_retries;
    if (config_.testgen_template_path) {
        verifier_config.testgen_template =
            read_text_file(*config_.testgen_template_path, "testgen template");
    }
    if (config_.judge_template_path) {
        verifier_config.judge_template =
            read_text_file(*config_.judge_template_path, "judge template");
    }
    Verifier verifier(*backend_, sandbox, verifier_config);

    // Exact-duplicate requirements (whitespace-normalized) are rejected
    // before insertion; the rejection set covers every node ever inserted,
    // so resumed runs rebuild it from the graph.
    std::set<std::string> seen_requirements;
    for (const auto& [id, node] : graph->sample_nodes()) {
        seen_requirements.insert(normalize_requirement(node.requirement));
    }

    const std::size_t max_attempts = config_.max_attempts_factor * config_.target_size;
    std::size_t last_checkpoint = graph->stats().retained_total();

    auto write_checkpoint = [&] {
        json state{{"attempts", attempts},
                   {"duplicates_rejected", duplicates},
                   {"discarded_attempts", discarded},
                   {"seed", config_.seed}};
        graph_io::save_checkpoint(*graph, config_.checkpoint_path, &state);
    };

    try {
        while (graph->stats().retained_total() < config_.target_size) {
            if (attempts >= max_attempts) {
                raise(ErrorCode::BackendFailure,
                      "attempt budget exhausted (" + std::to_string(attempts) +
                          " attempts for target " + std::to_string(config_.target_size) +
                          "); the backend mostly produces rejected samples");
            }
            const std::uint64_t attempt_index = attempts++;
            const EvolutionKind kind = schedule_next(graph->stats(), config_.schedule);

            CandidateSample candidate;
            Origin origin;
            std::vector<ParentId> parents;
            try {
                if (kind == EvolutionKind::Initial) {
                    const std::size_t max_seeds =
                        std::min(config_.seed_apis_max, graph->api_nodes().size());
                    rng::SplitMix count_rng(
                        rng::derive_seed(config_.seed, kStreamSeedCount, attempt_index));
                    const std::size_t count = count_rng.between(1, max_seeds);
                    const std::vector<ApiSpec> seeds = graph->sample_api_seeds(
                        count, rng::derive_seed(config_.seed, kStreamSeedSubset, attempt_index));
                    candidate = evolve_initial(*backend_, seeds, init_template_,
                                               config_.synthesis_params, config_.parse_retries);
                    origin = Origin::Initial;
                    for (const auto& seed : seeds) parents.push_back(ParentId::api(seed.api_id));
                } else {
                    rng::SplitMix count_rng(
                        rng::derive_seed(config_.seed, kStreamParentCount, attempt_index));
                    const std::size_t m = std::min<std::size_t>(
                        count_rng.between(2, 3), graph->stats().retained_total());
                    const std::vector<const SampleNode*> parent_nodes = graph->sample_retained(
                        m, rng::derive_seed(config_.seed, kStreamParentSubset, attempt_index));
                    candidate = evolve_iterative(*backend_, parent_nodes, iter_template_,
                                                 config_.synthesis_params, config_.parse_retries);
                    origin = Origin::Iterative;
                    for (const SampleNode* node : parent_nodes) {
                        parents.push_back(ParentId::sample(node->node_id));
                    }
                }

                if (!seen_requirements.insert(normalize_requirement(candidate.requirement))
                         .second) {
                    ++duplicates;
                    continue;
                }

                const NodeId node_id = graph->add_sample(origin, candidate.requirement,
                                                         candidate.solution, parents);
                const Verdict verdict = verifier.verify(candidate);
                if (verdict.accepted()) {
                    graph->mark_retained(node_id);
                } else {
                    graph->prune_node(node_id, verdict.prune_reason().value());
                }
            } catch (const Error& e) {
                if (is_infrastructure_error(e.code())) throw;
                // Unusable attempt (malformed completion, no valid tests,
                // unparseable verdict): the loop moves on; an inserted node
                // stays Candidate rather than being pruned.
                ++discarded;
                continue;
            }

            const std::size_t retained = graph->stats().retained_total();
            if (config_.checkpoint_interval > 0 &&
                retained - last_checkpoint >= config_.checkpoint_interval) {
                write_checkpoint();
                last_checkpoint = retained;
            }
        }
    } catch (...) {
        write_checkpoint();
        throw;
    }

    write_checkpoint();
    RunReport report;
    report.stats = graph->stats();
    report.attempts = attempts;
    report.duplicates_rejected = duplicates;
    report.discarded_attempts = discarded;
    report.completed = true;
    return report;
}

std::size_t Pipeline::export_dataset(const std::optional<std::filesystem::path>& out) {
    if (!std::filesystem::exists(config_.checkpoint_path)) {
        raise(ErrorCode::NoCheckpoint,
              "no checkpoint at '" + config_.checkpoint_path.string() + "'; run synthesize first");
    }
    graph_io::LoadedCheckpoint loaded = graph_io::load_checkpoint(config_.checkpoint_path);
    const TrainingDataset dataset = loaded.graph.export_dataset();
    graph_io::write_dataset(dataset, out.value_or(config_.export_path));
    return dataset.records.size();
}

EvalReport Pipeline::evaluate(const std::filesystem::path& benchmark_path, PromptMode mode,
                              const std::vector<int>& ks,
                              const std::optional<std::filesystem::path>& report_out) {
    const std::vector<ApiSpec> catalog = graph_io::load_catalog(config_.catalog_path);
    std::map<std::string, ApiSpec> catalog_map;
    for (const auto& spec : catalog) catalog_map.emplace(spec.api_id, spec);

    const std::vector<BenchmarkInstance> instances = load_benchmark(benchmark_path);
    if (instances.empty()) {
        raise(ErrorCode::DomainError, "benchmark '" + benchmark_path.string() + "' is empty");
    }
    Sandbox sandbox(config_.sandbox);

    std::optional<DocIndex> index;
    if (is_rag_mode(mode)) {
        if (!embed_) {
            embed_ = make_http_embed_client(config_.embed);
        }
        if (!config_.index_path.empty() && std::filesystem::exists(config_.index_path)) {
            index = load_index(config_.index_path, catalog);
        } else {
            index = index_docs(catalog, *embed_);
            if (!config_.index_path.empty()) {
                save_index(*index, config_.index_path);
            }
        }
    }

    std::vector<InstanceResult> results;
    std::optional<Error> first_failure;
    for (const auto& instance : instances) {
        InstanceResult result;
        result.instance_id = instance.instance_id;
        try {
            std::optional<std::vector<ApiSpec>> retrieval;
            if (mode == PromptMode::NaiveRag) {
                retrieval = retrieve_naive(*index, instance.requirement,
                                           std::min(config_.retrieval_k, index->entries.size()),
                                           *embed_);
            } else if (mode == PromptMode::EpiGen || mode == PromptMode::Capir) {
                const std::vector<std::string> subtasks =
                    decompose(*backend_, instance.requirement, config_.parse_retries);
                std::vector<ApiSpec> merged = retrieve_decomposed(
                    *index, subtasks, std::min(config_.k_per_subtask, index->entries.size()),
                    *embed_);
                if (mode == PromptMode::Capir) {
                    merged = rerank(*backend_, instance.requirement, merged,
                                    std::min(config_.rerank_top_m, merged.size()));
                }
                retrieval = std::move(merged);
            }
            const std::string prompt = build_prompt(instance, mode, catalog_map, retrieval);
            result.score =
                score_instance(*backend_, sandbox, instance, prompt, config_.eval_params);
        } catch (const Error& e) {
            result.failure = e.what();
            if (!first_failure) first_failure = e;
        }
        results.push_back(std::move(result));
    }

    const bool none_evaluated =
        std::none_of(results.begin(), results.end(),
                     [](const InstanceResult& r) { return r.score.has_value(); });
    if (none_evaluated && first_failure) {
        throw *first_failure;
    }

    json metadata{{"seed", config_.seed},
                  {"model", config_.backend.model_name},
                  {"benchmark", benchmark_path.string()},
                  {"temperature", config_.eval_params.temperature},
                  {"top_p", config_.eval_params.top_p}};
    EvalReport report = aggregate(results, ks, mode, metadata);
    if (report_out) {
        std::filesystem::path out = *report_out;
        if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
        std::ofstream file(out, std::ios::binary | std::ios::trunc);
        if (!file) {
            raise(ErrorCode::ConfigError, "cannot write report '" + out.string() + "'");
        }
        file << report.to_record_lines();
    }
    return report;
}

json inspect_checkpoint(const std::filesystem::path& checkpoint_path) {
    graph_io::LoadedCheckpoint loaded = graph_io::load_checkpoint(checkpoint_path);
    const GraphStats stats = loaded.graph.stats();
    json ratio{{"initial", stats.retained_initial},
               {"iterative", stats.retained_iterative},
               {"iterative_per_initial",
                stats.retained_initial == 0
                    ? 0.0
                    : static_cast<double>(stats.retained_iterative) /
                          static_cast<double>(stats.retained_initial)}};
    return json{{"library", loaded.graph.library_name()},
                {"api_count", loaded.graph.api_nodes().size()},
                {"sample_count", loaded.graph.sample_nodes().size()},
                {"edge_count", loaded.graph.edges().size()},
                {"stats", json{{"retained_initial", stats.retained_initial},
                               {"retained_iterative", stats.retained_iterative},
                               {"retained_total", stats.retained_total()},
                               {"candidates", stats.candidates},
                               {"pruned_syntax", stats.pruned_syntax},
                               {"pruned_execution", stats.pruned_execution},
                               {"pruned_functionality", stats.pruned_functionality},
                               {"pruned_total", stats.pruned_total()}}},
                {"ratio", ratio},
                {"pipeline_state", loaded.pipeline_state}};
}

std::string inspect_to_text(const json& summary) {
    std::ostringstream out;
    const json& stats = summary["stats"];
    out << "library: " << summary["library"].get<std::string>() << "\n"
        << "api nodes: " << summary["api_count"] << "   sample nodes: "
        << summary["sample_count"] << "   edges: " << summary["edge_count"] << "\n"
        << "retained: " << stats["retained_total"] << " (initial "
        << stats["retained_initial"] << ", iterative " << stats["retained_iterative"] << ")\n"
        << "pruned: " << stats["pruned_total"] << " (syntax " << stats["pruned_syntax"]
        << ", execution " << stats["pruned_execution"] << ", functionality "
        << stats["pruned_functionality"] << ")\n"
        << "candidates pending: " << stats["candidates"] << "\n"
        << "iterative per initial: " << summary["ratio"]["iterative_per_initial"] << "\n";
    if (summary.contains("pipeline_state") && summary["pipeline_state"].is_object()) {
        out << "attempts: " << summary["pipeline_state"].value("attempts", std::size_t{0})
            << "\n";
    }
    return out.str();
}

}  // namespace forge
