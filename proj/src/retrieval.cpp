#include "forge/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "forge/error.hpp"
#include "forge/prompts.hpp"

namespace forge {

using nlohmann::json;

namespace {

std::map<std::string, ApiSpec> spec_map(const std::vector<ApiSpec>& catalog) {
    std::map<std::string, ApiSpec> specs;
    for (const auto& spec : catalog) specs.emplace(spec.api_id, spec);
    return specs;
}

void normalize_in_place(std::vector<double>& vec) {
    double norm_sq = 0.0;
    for (double v : vec) norm_sq += v * v;
    if (norm_sq <= 0.0 || !std::isfinite(norm_sq)) {
        raise(ErrorCode::EmbedServiceFailure,
              "embedding service returned a zero or non-finite vector");
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec) v *= inv;
}

bool identifier_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

// Position of api_id in text as a whole token, or npos.
std::size_t find_token(const std::string& text, const std::string& api_id) {
    std::size_t pos = 0;
    while ((pos = text.find(api_id, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !identifier_char(text[pos - 1]);
        const std::size_t after = pos + api_id.size();
        const bool right_ok = after >= text.size() || !identifier_char(text[after]);
        if (left_ok && right_ok) return pos;
        pos += 1;
    }
    return std::string::npos;
}

std::string trim(const std::string& text) {
    std::size_t begin = 0, end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

}  // namespace

std::string embedding_text(const ApiSpec& spec) {
    return spec.signature + "\n" + spec.description;
}

DocIndex index_docs(const std::vector<ApiSpec>& catalog, EmbedClient& client, bool normalize) {
    if (catalog.empty()) {
        raise(ErrorCode::DomainError, "cannot index an empty catalog");
    }
    std::vector<std::string> texts;
    texts.reserve(catalog.size());
    for (const auto& spec : catalog) texts.push_back(embedding_text(spec));

    std::vector<std::vector<double>> vectors = client.embed(texts);
    if (vectors.size() != catalog.size()) {
        raise(ErrorCode::EmbedServiceFailure, "embedding count does not match catalog size");
    }
    DocIndex index;
    index.normalized = normalize;
    index.dimension = vectors.empty() ? 0 : vectors.front().size();
    if (index.dimension == 0) {
        raise(ErrorCode::EmbedServiceFailure, "embedding service returned empty vectors");
    }
    index.specs = spec_map(catalog);
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (vectors[i].size() != index.dimension) {
            raise(ErrorCode::EmbedServiceFailure,
                  "embedding dimensions are inconsistent (" + std::to_string(vectors[i].size()) +
                      " vs " + std::to_string(index.dimension) + ")");
        }
        if (normalize) normalize_in_place(vectors[i]);
        index.entries.push_back(DocIndex::Entry{catalog[i].api_id, std::move(vectors[i])});
    }
    return index;
}

void save_index(const DocIndex& index, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(ErrorCode::ConfigError, "cannot open index file '" + path.string() + "'");
    }
    json header{{"format", "forge-doc-index"},
                {"version", 1},
                {"dimension", index.dimension},
                {"normalized", index.normalized},
                {"entry_count", index.entries.size()}};
    out << header.dump() << '\n';
    for (const auto& entry : index.entries) {
        out << json{{"api_id", entry.api_id}, {"embedding", entry.embedding}}.dump() << '\n';
    }
}

DocIndex load_index(const std::filesystem::path& path, const std::vector<ApiSpec>& catalog) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::ConfigError, "cannot open index file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        raise(ErrorCode::ConfigError, "index file is empty");
    }
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format", "") != std::string("forge-doc-index")) {
        raise(ErrorCode::ConfigError, "file is not a forge doc index");
    }
    DocIndex index;
    index.dimension = header.value("dimension", std::size_t{0});
    index.normalized = header.value("normalized", true);
    index.specs = spec_map(catalog);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("api_id") ||
            !record.contains("embedding")) {
            raise(ErrorCode::ConfigError, "malformed index record");
        }
        DocIndex::Entry entry;
        entry.api_id = record["api_id"].get<std::string>();
        entry.embedding = record["embedding"].get<std::vector<double>>();
        if (entry.embedding.size() != index.dimension) {
            raise(ErrorCode::ConfigError, "index entry dimension mismatch");
        }
        index.entries.push_back(std::move(entry));
    }
    if (index.entries.size() != header.value("entry_count", index.entries.size())) {
        raise(ErrorCode::ConfigError, "index file truncated");
    }
    return index;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        raise(ErrorCode::DomainError, "cosine of vectors with different dimensions");
    }
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a <= 0.0 || norm_b <= 0.0) return 0.0;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

std::vector<ScoredApi> retrieve_naive_scored(const DocIndex& index, const std::string& query,
                                             std::size_t k, EmbedClient& client) {
    if (k < 1 || k > index.entries.size()) {
        raise(ErrorCode::CountOutOfRange,
              "k=" + std::to_string(k) + " outside [1, " +
                  std::to_string(index.entries.size()) + "]");
    }
    const std::vector<double> query_vec = client.embed({query}).front();
    std::vector<std::pair<double, const DocIndex::Entry*>> scored;
    scored.reserve(index.entries.size());
    for (const auto& entry : index.entries) {
        scored.emplace_back(cosine_similarity(query_vec, entry.embedding), &entry);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& lhs, const auto& rhs) {
        if (lhs.first != rhs.first) return lhs.first > rhs.first;
        return lhs.second->api_id < rhs.second->api_id;
    });
    std::vector<ScoredApi> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto it = index.specs.find(scored[i].second->api_id);
        if (it == index.specs.end()) {
            raise(ErrorCode::UnknownApiId,
                  "index entry '" + scored[i].second->api_id + "' missing from catalog");
        }
        out.push_back(ScoredApi{it->second, scored[i].first});
    }
    return out;
}

std::vector<ApiSpec> retrieve_naive(const DocIndex& index, const std::string& query,
                                    std::size_t k, EmbedClient& client) {
    std::vector<ApiSpec> out;
    for (auto& scored : retrieve_naive_scored(index, query, k, client)) {
        out.push_back(std::move(scored.spec));
    }
    return out;
}

std::vector<std::string> decompose(CompletionBackend& backend, const std::string& requirement,
                                   int parse_retries) {
    if (requirement.empty()) {
        raise(ErrorCode::DomainError, "requirement must be non-empty");
    }
    const std::string prompt =
        render_template(prompts::decompose(), {{"requirement", requirement}});
    SamplingParams params;
    params.n = 1;
    const int attempts = 1 + std::max(0, parse_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const std::string completion = backend.complete(prompt, params).front();
        std::vector<std::string> subtasks;
        std::istringstream lines(completion);
        std::string line;
        while (std::getline(lines, line)) {
            std::string text = trim(line);
            std::size_t pos = 0;
            bool enumerated = false;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            }
            if (pos > 0 && pos < text.size() && (text[pos] == '.' || text[pos] == ')')) {
                enumerated = true;
                ++pos;
            } else if (!text.empty() && (text[0] == '-' || text[0] == '*')) {
                enumerated = true;
                pos = 1;
            }
            if (!enumerated) continue;
            std::string body = trim(text.substr(pos));
            if (!body.empty()) subtasks.push_back(std::move(body));
        }
        if (!subtasks.empty()) return subtasks;
    }
    raise(ErrorCode::MalformedCompletion,
          "decomposition produced no enumerated subtasks after retries");
}

std::vector<ApiSpec> retrieve_decomposed(const DocIndex& index,
                                         const std::vector<std::string>& subtasks,
                                         std::size_t k_per_subtask, EmbedClient& client) {
    if (subtasks.empty()) {
        raise(ErrorCode::DomainError, "subtask list must be non-empty");
    }
    if (k_per_subtask < 1 || k_per_subtask > index.entries.size()) {
        raise(ErrorCode::CountOutOfRange,
              "k_per_subtask=" + std::to_string(k_per_subtask) + " outside [1, " +
                  std::to_string(index.entries.size()) + "]");
    }
    std::vector<ApiSpec> merged;
    std::set<std::string> seen;
    for (const auto& subtask : subtasks) {
        for (auto& spec : retrieve_naive(index, subtask, k_per_subtask, client)) {
            if (seen.insert(spec.api_id).second) {
                merged.push_back(std::move(spec));
            }
        }
    }
    return merged;
}

std::vector<ApiSpec> rerank(CompletionBackend& backend, const std::string& requirement,
                            const std::vector<ApiSpec>& candidates, std::size_t top_m) {
    if (candidates.empty()) {
        raise(ErrorCode::DomainError, "rerank requires at least one candidate");
    }
    if (top_m < 1 || top_m > candidates.size()) {
        raise(ErrorCode::CountOutOfRange,
              "top_m=" + std::to_string(top_m) + " outside [1, " +
                  std::to_string(candidates.size()) + "]");
    }
    std::ostringstream listing;
    for (const auto& spec : candidates) {
        listing << spec.api_id << " — " << spec.signature << "\n";
    }
    const std::string prompt = render_template(
        prompts::rerank(), {{"requirement", requirement}, {"api_candidates", listing.str()}});
    SamplingParams params;
    params.n = 1;
    const std::string completion = backend.complete(prompt, params).front();

    // Known candidates ranked by first token occurrence; unknown names in the
    // completion are ignored, missing ones fill in original order.
    std::vector<std::pair<std::size_t, const ApiSpec*>> ranked;
    std::vector<const ApiSpec*> unmentioned;
    for (const auto& spec : candidates) {
        const std::size_t pos = find_token(completion, spec.api_id);
        if (pos == std::string::npos) {
            unmentioned.push_back(&spec);
        } else {
            ranked.emplace_back(pos, &spec);
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
    std::vector<ApiSpec> out;
    out.reserve(top_m);
    for (const auto& [pos, spec] : ranked) {
        if (out.size() == top_m) break;
        out.push_back(*spec);
    }
    for (const ApiSpec* spec : unmentioned) {
        if (out.size() == top_m) break;
        out.push_back(*spec);
    }
    return out;
}

}  // namespace forge
