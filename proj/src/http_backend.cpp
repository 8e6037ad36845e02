// HTTP implementations of the completion and embedding clients, speaking the
// chat-completions wire format used by self-hosted inference servers.

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "forge/backend.hpp"
#include "forge/embed.hpp"
#include "forge/error.hpp"

namespace forge {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return (value != nullptr && *value != '\0') ? std::string(value) : fallback;
}

std::string read_secret(const std::string& env_name) {
    if (env_name.empty()) return {};
    const char* value = std::getenv(env_name.c_str());
    return value != nullptr ? std::string(value) : std::string{};
}

struct HttpOutcome {
    bool transport_error{false};
    bool timed_out{false};
    int status{0};
    std::string body;
};

HttpOutcome post_json(const std::string& endpoint, const std::string& path,
                      const std::string& api_key, const json& payload,
                      std::chrono::milliseconds timeout) {
    httplib::Client client(endpoint);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto rest = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), rest.count());
    client.set_read_timeout(secs.count(), rest.count());
    client.set_write_timeout(secs.count(), rest.count());
    httplib::Headers headers;
    if (!api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key);
    }
    auto result = client.Post(path, headers, payload.dump(), "application/json");
    HttpOutcome outcome;
    if (!result) {
        outcome.transport_error = true;
        auto err = result.error();
        outcome.timed_out = err == httplib::Error::ConnectionTimeout ||
                            err == httplib::Error::Read || err == httplib::Error::Write;
        return outcome;
    }
    outcome.status = result->status;
    outcome.body = result->body;
    return outcome;
}

class HttpBackend : public CompletionBackend {
public:
    explicit HttpBackend(BackendConfig config)
        : CompletionBackend(config.in_flight_limit), config_(std::move(config)) {
        endpoint_ = env_or("FORGE_LLM_ENDPOINT", config_.endpoint);
        if (endpoint_.empty()) {
            raise(ErrorCode::ConfigError,
                  "no LLM endpoint configured (set backend.endpoint or FORGE_LLM_ENDPOINT)");
        }
        api_key_ = read_secret(config_.auth_env);
    }

private:
    std::vector<std::string> do_complete(const std::string& prompt,
                                         const SamplingParams& params) override {
        json payload{{"model", config_.model_name},
                     {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                     {"temperature", params.temperature},
                     {"top_p", params.top_p},
                     {"n", params.n},
                     {"max_tokens", params.max_tokens}};

        Error last_error(ErrorCode::BackendFailure, "request never attempted");
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(config_.retry_backoff * (1 << (attempt - 1)));
            }
            HttpOutcome outcome = post_json(endpoint_, "/v1/chat/completions", api_key_,
                                            payload, config_.timeout);
            if (outcome.transport_error) {
                last_error = outcome.timed_out
                                 ? Error(ErrorCode::Timeout, "request to " + endpoint_ +
                                                                 " timed out")
                                 : Error(ErrorCode::BackendFailure,
                                         "cannot reach " + endpoint_);
                continue;  // retryable
            }
            if (outcome.status == 401 || outcome.status == 403) {
                raise(ErrorCode::AuthFailure,
                      "endpoint rejected credentials (HTTP " +
                          std::to_string(outcome.status) + ")");
            }
            if (outcome.status == 429) {
                last_error = Error(ErrorCode::RateLimited, "endpoint rate-limited the request");
                continue;  // retryable
            }
            if (outcome.status >= 500) {
                last_error = Error(ErrorCode::BackendFailure,
                                   "endpoint returned HTTP " + std::to_string(outcome.status));
                continue;  // retryable
            }
            if (outcome.status != 200) {
                raise(ErrorCode::ProtocolError,
                      "unexpected HTTP status " + std::to_string(outcome.status));
            }
            return parse_completions(outcome.body, params.n);
        }
        throw last_error;
    }

    static std::vector<std::string> parse_completions(const std::string& body, int n) {
        json parsed = json::parse(body, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("choices") ||
            !parsed["choices"].is_array()) {
            raise(ErrorCode::ProtocolError, "response payload is not a chat completion");
        }
        std::vector<std::string> completions;
        for (const auto& choice : parsed["choices"]) {
            if (!choice.contains("message") || !choice["message"].contains("content") ||
                !choice["message"]["content"].is_string()) {
                raise(ErrorCode::ProtocolError, "choice lacks message.content");
            }
            completions.push_back(choice["message"]["content"].get<std::string>());
        }
        if (completions.size() != static_cast<std::size_t>(n)) {
            raise(ErrorCode::ProtocolError,
                  "requested " + std::to_string(n) + " completions, got " +
                      std::to_string(completions.size()));
        }
        return completions;
    }

    BackendConfig config_;
    std::string endpoint_;
    std::string api_key_;
};

class HttpEmbedClient : public EmbedClient {
public:
    explicit HttpEmbedClient(EmbedConfig config) : config_(std::move(config)) {
        endpoint_ = env_or("FORGE_EMBED_ENDPOINT", config_.endpoint);
        if (endpoint_.empty()) {
            raise(ErrorCode::ConfigError,
                  "no embedding endpoint configured (set retrieval.embed_endpoint or "
                  "FORGE_EMBED_ENDPOINT)");
        }
        api_key_ = read_secret(config_.auth_env);
    }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override {
        json payload{{"model", config_.model_name}, {"inputs", inputs}};
        Error last_error(ErrorCode::EmbedServiceFailure, "request never attempted");
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(200) * (1 << (attempt - 1)));
            }
            HttpOutcome outcome =
                post_json(endpoint_, "/v1/embeddings", api_key_, payload, config_.timeout);
            if (outcome.transport_error || outcome.status == 429 || outcome.status >= 500) {
                last_error = Error(ErrorCode::EmbedServiceFailure,
                                   "embedding endpoint unavailable (status " +
                                       std::to_string(outcome.status) + ")");
                continue;
            }
            if (outcome.status != 200) {
                raise(ErrorCode::EmbedServiceFailure,
                      "embedding endpoint returned HTTP " + std::to_string(outcome.status));
            }
            json parsed = json::parse(outcome.body, nullptr, false);
            if (parsed.is_discarded() || !parsed.contains("embeddings") ||
                !parsed["embeddings"].is_array()) {
                raise(ErrorCode::EmbedServiceFailure, "embedding payload malformed");
            }
            std::vector<std::vector<double>> vectors;
            for (const auto& row : parsed["embeddings"]) {
                if (!row.is_array()) {
                    raise(ErrorCode::EmbedServiceFailure, "embedding row is not an array");
                }
                vectors.push_back(row.get<std::vector<double>>());
            }
            if (vectors.size() != inputs.size()) {
                raise(ErrorCode::EmbedServiceFailure,
                      "embedding count does not match input count");
            }
            return vectors;
        }
        throw last_error;
    }

private:
    EmbedConfig config_;
    std::string endpoint_;
    std::string api_key_;
};

}  // namespace

std::unique_ptr<CompletionBackend> make_http_backend(BackendConfig config) {
    return std::make_unique<HttpBackend>(std::move(config));
}

std::unique_ptr<EmbedClient> make_http_embed_client(EmbedConfig config) {
    return std::make_unique<HttpEmbedClient>(std::move(config));
}

}  // namespace forge
