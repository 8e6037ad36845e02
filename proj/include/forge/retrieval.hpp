#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forge/backend.hpp"
#include "forge/embed.hpp"
#include "forge/graph.hpp"

namespace forge {

/// Embedding store over a private-library API catalog. Small catalogs, so
/// retrieval is brute-force exact nearest neighbor.
struct DocIndex {
    struct Entry {
        std::string api_id;
        std::vector<double> embedding;
    };

    std::vector<Entry> entries;
    std::size_t dimension{0};
    bool normalized{true};
    std::map<std::string, ApiSpec> specs;  // attached catalog, keyed by api_id
};

/// Text embedded for an API: its signature, then its description.
std::string embedding_text(const ApiSpec& spec);

DocIndex index_docs(const std::vector<ApiSpec>& catalog, EmbedClient& client,
                    bool normalize = true);

void save_index(const DocIndex& index, const std::filesystem::path& path);
DocIndex load_index(const std::filesystem::path& path, const std::vector<ApiSpec>& catalog);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

struct ScoredApi {
    ApiSpec spec;
    double score{0.0};
};

/// Cosine top-k, descending score, ties broken by ascending api_id.
std::vector<ScoredApi> retrieve_naive_scored(const DocIndex& index, const std::string& query,
                                             std::size_t k, EmbedClient& client);
std::vector<ApiSpec> retrieve_naive(const DocIndex& index, const std::string& query,
                                    std::size_t k, EmbedClient& client);

/// Splits a requirement into subtasks via an enumerated-list completion.
std::vector<std::string> decompose(CompletionBackend& backend, const std::string& requirement,
                                   int parse_retries = 3);

/// Per-subtask top-k, unioned in first-seen order with api_id de-duplication.
std::vector<ApiSpec> retrieve_decomposed(const DocIndex& index,
                                         const std::vector<std::string>& subtasks,
                                         std::size_t k_per_subtask, EmbedClient& client);

/// LLM reranking of retrieved candidates. The output is always drawn from the
/// input set: unknown names are dropped and any shortfall is filled in the
/// original order.
std::vector<ApiSpec> rerank(CompletionBackend& backend, const std::string& requirement,
                            const std::vector<ApiSpec>& candidates, std::size_t top_m);

}  // namespace forge
