#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace forge {

/// Batch text-embedding interface mirroring the completion backend: one HTTP
/// implementation, plus deterministic stand-ins for offline use.
class EmbedClient {
public:
    virtual ~EmbedClient() = default;

    /// One vector per input, all of equal dimension.
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) = 0;
};

/// Exact-match scripted embedder. Unscripted inputs fall back to the
/// configured function, or raise EmbedServiceFailure if none is set.
class MockEmbedClient : public EmbedClient {
public:
    void script(std::string text, std::vector<double> vector);
    void set_fallback(std::function<std::vector<double>(const std::string&)> fn);
    std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override;

private:
    std::map<std::string, std::vector<double>> scripted_;
    std::function<std::vector<double>(const std::string&)> fallback_;
};

/// Deterministic pseudo-embedder: hashes the text into a fixed-dimension unit
/// vector. No semantic meaning; exists so retrieval paths can run end to end
/// without an embedding service.
class HashEmbedClient : public EmbedClient {
public:
    explicit HashEmbedClient(std::size_t dimension = 64);
    std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override;

private:
    std::size_t dimension_;
};

struct EmbedConfig {
    std::string endpoint;  // FORGE_EMBED_ENDPOINT overrides when set
    std::string model_name{"default-embed"};
    std::string auth_env{"FORGE_EMBED_KEY"};
    std::chrono::milliseconds timeout{30000};
    int max_retries{3};
};

std::unique_ptr<EmbedClient> make_http_embed_client(EmbedConfig config);

}  // namespace forge
