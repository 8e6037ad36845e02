#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forge/backend.hpp"
#include "forge/graph.hpp"
#include "forge/prompts.hpp"

namespace forge {

/// A parsed (requirement, solution) pair extracted from one completion. The
/// raw completion is kept for audit.
struct CandidateSample {
    std::string requirement;
    std::string solution;
    std::string raw_completion;
};

/// Target mix of initial vs iterative samples plus the bootstrap threshold
/// before iterative evolution may start.
struct RatioSchedule {
    std::size_t target_init{1};
    std::size_t target_iter{2};
    std::size_t min_initial_pool{50};

    void validate() const;  // throws DomainError
};

enum class EvolutionKind { Initial, Iterative };

/// Content of the first fenced code block, if any.
std::optional<std::string> extract_first_code_block(const std::string& text);
std::vector<std::string> extract_all_code_blocks(const std::string& text);

/// Splits a completion into requirement (a "Requirement:" section, or the
/// prose before the first fence) and solution (first fenced block).
/// Throws MalformedCompletion when either part is empty or no block exists.
CandidateSample parse_candidate(const std::string& raw);

/// Canonical textual form; parse_candidate(serialize_candidate(c)) round-trips.
std::string serialize_candidate(const CandidateSample& candidate);

/// Whitespace-collapsed form used for exact-duplicate rejection.
std::string normalize_requirement(const std::string& requirement);

/// Synthesizes a candidate from API seeds (graph initial evolution). Retries
/// with fresh sampling on malformed completions before giving up.
CandidateSample evolve_initial(CompletionBackend& backend, const std::vector<ApiSpec>& seeds,
                               const PromptTemplate& tpl, const SamplingParams& params,
                               int parse_retries = 3);

/// Synthesizes a candidate by merging existing samples (graph iterative
/// evolution); requires at least two parents.
CandidateSample evolve_iterative(CompletionBackend& backend,
                                 const std::vector<const SampleNode*>& parents,
                                 const PromptTemplate& tpl, const SamplingParams& params,
                                 int parse_retries = 3);

/// Decides which evolution kind to run next: Initial until the bootstrap pool
/// is full, then whichever side is behind the target ratio; ties go Initial.
EvolutionKind schedule_next(const GraphStats& stats, const RatioSchedule& schedule);

std::string render_initial_prompt(const std::vector<ApiSpec>& seeds, const PromptTemplate& tpl);
std::string render_iterative_prompt(const std::vector<const SampleNode*>& parents,
                                    const PromptTemplate& tpl);

}  // namespace forge
