#pragma once

#include <stdexcept>
#include <string>

namespace forge {

enum class ErrorCode {
    // graph
    DuplicateApiId,
    EmptyCatalog,
    UnknownParent,
    OriginParentMismatch,
    UnknownNode,
    AlreadyFinalized,
    CountOutOfRange,
    InsufficientPool,
    // evolution / parsing
    MalformedCompletion,
    // pruning
    UnsupportedGrammar,
    NoValidTests,
    UnparseableVerdict,
    // backend
    BackendFailure,
    Timeout,
    RateLimited,
    AuthFailure,
    ProtocolError,
    UnscriptedPrompt,
    // sandbox
    SandboxUnavailable,
    // retrieval
    EmbedServiceFailure,
    // evaluation
    MissingRetrieval,
    UnknownApiId,
    SchemaViolation,
    DuplicateInstanceId,
    DomainError,
    InconsistentN,
    // pipeline
    ConfigError,
    NoCheckpoint,
    CorruptCheckpoint,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

// True for failures of the surrounding machinery (endpoint down, sandbox
// missing) as opposed to verdicts about a candidate. Infrastructure failures
// must never turn into a pruned node or a zero score.
bool is_infrastructure_error(ErrorCode code);

}  // namespace forge
