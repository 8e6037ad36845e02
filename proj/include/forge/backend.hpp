#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace forge {

struct SamplingParams {
    double temperature{0.5};
    double top_p{0.95};
    int n{1};
    int max_tokens{2048};
};

void validate(const SamplingParams& params);  // throws DomainError

struct BackendConfig {
    std::string endpoint;  // FORGE_LLM_ENDPOINT overrides when set
    std::string model_name{"default"};
    std::string auth_env{"FORGE_LLM_KEY"};  // name of the env var holding the key
    std::chrono::milliseconds timeout{30000};
    int max_retries{3};
    int in_flight_limit{4};
    std::chrono::milliseconds retry_backoff{500};
};

struct AuditRecord {
    std::uint64_t index{0};
    std::string prompt;
    SamplingParams params;
    std::vector<std::string> completions;
    std::string error;  // empty on success
};

/// Thread-safe request/response trail. Replay of a pipeline run with a fixed
/// seed and the mock backend reproduces these prompts byte for byte.
class AuditLog {
public:
    void record(std::string prompt, const SamplingParams& params,
                std::vector<std::string> completions, std::string error);
    std::vector<AuditRecord> snapshot() const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<AuditRecord> records_;
};

/// Counting gate bounding concurrent requests per backend handle. Tracks the
/// high-water mark so tests can assert the bound was honored.
class InFlightGate {
public:
    explicit InFlightGate(int limit);

    class Pass {
    public:
        explicit Pass(InFlightGate& gate);
        ~Pass();
        Pass(const Pass&) = delete;
        Pass& operator=(const Pass&) = delete;

    private:
        InFlightGate& gate_;
    };

    int max_observed() const;

private:
    friend class Pass;
    void enter();
    void leave();

    const int limit_;
    int active_{0};
    int max_observed_{0};
    mutable std::mutex mutex_;
    std::condition_variable cv_;
};

/// Uniform completion interface over an external LLM endpoint or a scripted
/// mock. Handles are safe to share across threads.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    /// Returns exactly params.n completion texts or throws.
    std::vector<std::string> complete(const std::string& prompt, const SamplingParams& params);

    void set_audit_log(std::shared_ptr<AuditLog> log) { audit_ = std::move(log); }
    int max_in_flight_observed() const { return gate_.max_observed(); }

protected:
    explicit CompletionBackend(int in_flight_limit) : gate_(in_flight_limit) {}
    virtual std::vector<std::string> do_complete(const std::string& prompt,
                                                 const SamplingParams& params) = 0;

private:
    InFlightGate gate_;
    std::shared_ptr<AuditLog> audit_;
};

/// Fully scripted deterministic backend for offline tests. Matchers are
/// substrings tried in script order; each matcher owns a response sequence.
/// A call consuming n completions advances the sequence by n; an exhausted
/// sequence repeats its last element. Responses may contain the token
/// {{prompt_hash}}, replaced by a 16-hex-digit FNV-1a hash of the prompt, so
/// a scripted response can be a pure function of the prompt.
class MockBackend : public CompletionBackend {
public:
    struct Rule {
        std::string matcher;
        std::vector<std::string> responses;
    };

    explicit MockBackend(std::vector<Rule> script, int in_flight_limit = 8);
    MockBackend(std::initializer_list<Rule> script)
        : MockBackend(std::vector<Rule>(script)) {}

    /// Artificial per-call latency, for concurrency tests.
    void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }

    static std::string prompt_hash(const std::string& prompt);

private:
    std::vector<std::string> do_complete(const std::string& prompt,
                                         const SamplingParams& params) override;

    std::vector<Rule> rules_;
    std::vector<std::size_t> cursors_;
    std::chrono::milliseconds latency_{0};
    std::mutex mutex_;
};

std::unique_ptr<CompletionBackend> make_http_backend(BackendConfig config);

}  // namespace forge
