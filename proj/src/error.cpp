#include "forge/error.hpp"

namespace forge {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateApiId: return "DuplicateApiId";
        case ErrorCode::EmptyCatalog: return "EmptyCatalog";
        case ErrorCode::UnknownParent: return "UnknownParent";
        case ErrorCode::OriginParentMismatch: return "OriginParentMismatch";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::AlreadyFinalized: return "AlreadyFinalized";
        case ErrorCode::CountOutOfRange: return "CountOutOfRange";
        case ErrorCode::InsufficientPool: return "InsufficientPool";
        case ErrorCode::MalformedCompletion: return "MalformedCompletion";
        case ErrorCode::UnsupportedGrammar: return "UnsupportedGrammar";
        case ErrorCode::NoValidTests: return "NoValidTests";
        case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
        case ErrorCode::BackendFailure: return "BackendFailure";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::AuthFailure: return "AuthFailure";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::UnscriptedPrompt: return "UnscriptedPrompt";
        case ErrorCode::SandboxUnavailable: return "SandboxUnavailable";
        case ErrorCode::EmbedServiceFailure: return "EmbedServiceFailure";
        case ErrorCode::MissingRetrieval: return "MissingRetrieval";
        case ErrorCode::UnknownApiId: return "UnknownApiId";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::DuplicateInstanceId: return "DuplicateInstanceId";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::InconsistentN: return "InconsistentN";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::NoCheckpoint: return "NoCheckpoint";
        case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    }
    return "UnknownError";
}

bool is_infrastructure_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::BackendFailure:
        case ErrorCode::Timeout:
        case ErrorCode::RateLimited:
        case ErrorCode::AuthFailure:
        case ErrorCode::ProtocolError:
        case ErrorCode::UnscriptedPrompt:
        case ErrorCode::SandboxUnavailable:
        case ErrorCode::EmbedServiceFailure:
            return true;
        default:
            return false;
    }
}

}  // namespace forge
