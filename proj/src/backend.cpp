#include "forge/backend.hpp"

#include <thread>

#include "forge/error.hpp"

namespace forge {

void validate(const SamplingParams& params) {
    if (params.temperature < 0.0) {
        raise(ErrorCode::DomainError, "temperature must be >= 0");
    }
    if (!(params.top_p > 0.0) || params.top_p > 1.0) {
        raise(ErrorCode::DomainError, "top_p must be in (0, 1]");
    }
    if (params.n < 1) {
        raise(ErrorCode::DomainError, "n must be >= 1");
    }
    if (params.max_tokens < 1) {
        raise(ErrorCode::DomainError, "max_tokens must be >= 1");
    }
}

void AuditLog::record(std::string prompt, const SamplingParams& params,
                      std::vector<std::string> completions, std::string error) {
    std::lock_guard lock(mutex_);
    AuditRecord rec;
    rec.index = records_.size();
    rec.prompt = std::move(prompt);
    rec.params = params;
    rec.completions = std::move(completions);
    rec.error = std::move(error);
    records_.push_back(std::move(rec));
}

std::vector<AuditRecord> AuditLog::snapshot() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t AuditLog::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

InFlightGate::InFlightGate(int limit) : limit_(limit) {
    if (limit < 1) {
        raise(ErrorCode::DomainError, "in_flight_limit must be >= 1");
    }
}

void InFlightGate::enter() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return active_ < limit_; });
    ++active_;
    max_observed_ = std::max(max_observed_, active_);
}

void InFlightGate::leave() {
    {
        std::lock_guard lock(mutex_);
        --active_;
    }
    cv_.notify_one();
}

int InFlightGate::max_observed() const {
    std::lock_guard lock(mutex_);
    return max_observed_;
}

InFlightGate::Pass::Pass(InFlightGate& gate) : gate_(gate) { gate_.enter(); }
InFlightGate::Pass::~Pass() { gate_.leave(); }

std::vector<std::string> CompletionBackend::complete(const std::string& prompt,
                                                     const SamplingParams& params) {
    if (prompt.empty()) {
        raise(ErrorCode::DomainError, "prompt must be non-empty");
    }
    validate(params);
    InFlightGate::Pass pass(gate_);
    try {
        std::vector<std::string> completions = do_complete(prompt, params);
        if (audit_) audit_->record(prompt, params, completions, "");
        return completions;
    } catch (const Error& e) {
        if (audit_) audit_->record(prompt, params, {}, e.what());
        throw;
    }
}

MockBackend::MockBackend(std::vector<Rule> script, int in_flight_limit)
    : CompletionBackend(in_flight_limit), rules_(std::move(script)),
      cursors_(rules_.size(), 0) {
    for (const auto& rule : rules_) {
        if (rule.responses.empty()) {
            raise(ErrorCode::DomainError,
                  "mock rule '" + rule.matcher + "' has no responses");
        }
    }
}

std::string MockBackend::prompt_hash(const std::string& prompt) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : prompt) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

std::vector<std::string> MockBackend::do_complete(const std::string& prompt,
                                                  const SamplingParams& params) {
    if (latency_.count() > 0) {
        std::this_thread::sleep_for(latency_);
    }
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        const Rule& rule = rules_[i];
        if (prompt.find(rule.matcher) == std::string::npos) continue;
        std::vector<std::string> out;
        out.reserve(static_cast<std::size_t>(params.n));
        for (int j = 0; j < params.n; ++j) {
            const std::size_t cursor = std::min(cursors_[i], rule.responses.size() - 1);
            if (cursors_[i] < rule.responses.size()) ++cursors_[i];
            std::string text = rule.responses[cursor];
            const std::string token = "{{prompt_hash}}";
            std::size_t pos;
            while ((pos = text.find(token)) != std::string::npos) {
                text.replace(pos, token.size(), prompt_hash(prompt));
            }
            out.push_back(std::move(text));
        }
        return out;
    }
    raise(ErrorCode::UnscriptedPrompt,
          "no mock rule matches prompt (length " + std::to_string(prompt.size()) + ")");
}

}  // namespace forge
