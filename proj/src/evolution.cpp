#include "forge/evolution.hpp"

#include <algorithm>
#include <cctype>

#include "forge/error.hpp"

namespace forge {

namespace {

std::string trim(const std::string& text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

// A fence is a line whose first non-space characters are ```.
bool is_fence_line(const std::string& text, std::size_t line_start, std::size_t line_end) {
    std::size_t pos = line_start;
    while (pos < line_end && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    return line_end - pos >= 3 && text.compare(pos, 3, "```") == 0;
}

struct FencedBlock {
    std::size_t open_start;  // offset of the opening fence line
    std::string content;
};

std::vector<FencedBlock> scan_blocks(const std::string& text) {
    std::vector<FencedBlock> blocks;
    std::size_t line_start = 0;
    bool in_block = false;
    std::size_t block_open = 0;
    std::size_t content_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string::npos) line_end = text.size();
        if (is_fence_line(text, line_start, line_end)) {
            if (!in_block) {
                in_block = true;
                block_open = line_start;
                content_start = line_end < text.size() ? line_end + 1 : text.size();
            } else {
                std::string content = text.substr(content_start, line_start - content_start);
                if (!content.empty() && content.back() == '\n') content.pop_back();
                blocks.push_back(FencedBlock{block_open, std::move(content)});
                in_block = false;
            }
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return blocks;
}

std::string rstrip(std::string text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
        text.pop_back();
    }
    return text;
}

CandidateSample run_evolution(CompletionBackend& backend, const std::string& prompt,
                              const SamplingParams& params, int parse_retries) {
    SamplingParams single = params;
    single.n = 1;
    const int attempts = 1 + std::max(0, parse_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const std::string completion = backend.complete(prompt, single).front();
        try {
            return parse_candidate(completion);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::MalformedCompletion || attempt + 1 == attempts) {
                throw;
            }
            // fresh sample on the next attempt
        }
    }
    raise(ErrorCode::MalformedCompletion, "unreachable");
}

}  // namespace

void RatioSchedule::validate() const {
    if (target_init < 1 || target_iter < 1) {
        raise(ErrorCode::DomainError, "ratio targets must be >= 1");
    }
    // Iterative evolution draws up to 3 parents, so the bootstrap pool must
    // hold at least that many retained samples.
    if (min_initial_pool < 3) {
        raise(ErrorCode::DomainError, "min_initial_pool must be >= 3");
    }
}

std::optional<std::string> extract_first_code_block(const std::string& text) {
    auto blocks = scan_blocks(text);
    if (blocks.empty()) return std::nullopt;
    return blocks.front().content;
}

std::vector<std::string> extract_all_code_blocks(const std::string& text) {
    std::vector<std::string> out;
    for (auto& block : scan_blocks(text)) {
        out.push_back(std::move(block.content));
    }
    return out;
}

CandidateSample parse_candidate(const std::string& raw) {
    auto blocks = scan_blocks(raw);
    if (blocks.empty()) {
        raise(ErrorCode::MalformedCompletion, "completion contains no fenced code block");
    }
    const FencedBlock& first = blocks.front();
    std::string preamble = raw.substr(0, first.open_start);
    static const std::string marker = "Requirement:";
    std::string requirement;
    const std::size_t marker_pos = preamble.find(marker);
    if (marker_pos != std::string::npos) {
        requirement = trim(preamble.substr(marker_pos + marker.size()));
    } else {
        requirement = trim(preamble);
    }
    std::string solution = rstrip(first.content);
    // keep indentation, drop leading blank lines only
    std::size_t sol_begin = 0;
    while (sol_begin < solution.size() &&
           (solution[sol_begin] == '\n' || solution[sol_begin] == '\r')) {
        ++sol_begin;
    }
    solution.erase(0, sol_begin);
    if (requirement.empty()) {
        raise(ErrorCode::MalformedCompletion, "completion has an empty requirement");
    }
    if (solution.empty()) {
        raise(ErrorCode::MalformedCompletion, "completion has an empty solution block");
    }
    return CandidateSample{std::move(requirement), std::move(solution), raw};
}

std::string serialize_candidate(const CandidateSample& candidate) {
    return "Requirement: " + candidate.requirement + "\n\n```python\n" + candidate.solution +
           "\n```\n";
}

std::string normalize_requirement(const std::string& requirement) {
    std::string out;
    out.reserve(requirement.size());
    bool pending_space = false;
    for (char c : requirement) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::string render_initial_prompt(const std::vector<ApiSpec>& seeds, const PromptTemplate& tpl) {
    return render_template(tpl.text, {{"api_specs", format_api_specs(seeds)}});
}

std::string render_iterative_prompt(const std::vector<const SampleNode*>& parents,
                                    const PromptTemplate& tpl) {
    return render_template(tpl.text, {{"parent_samples", format_parent_samples(parents)}});
}

CandidateSample evolve_initial(CompletionBackend& backend, const std::vector<ApiSpec>& seeds,
                               const PromptTemplate& tpl, const SamplingParams& params,
                               int parse_retries) {
    if (seeds.empty()) {
        raise(ErrorCode::DomainError, "initial evolution requires at least one API seed");
    }
    if (tpl.kind != TemplateKind::InitInstruction) {
        raise(ErrorCode::DomainError, "initial evolution needs an InitInstruction template");
    }
    return run_evolution(backend, render_initial_prompt(seeds, tpl), params, parse_retries);
}

CandidateSample evolve_iterative(CompletionBackend& backend,
                                 const std::vector<const SampleNode*>& parents,
                                 const PromptTemplate& tpl, const SamplingParams& params,
                                 int parse_retries) {
    if (parents.size() < 2) {
        raise(ErrorCode::DomainError, "iterative evolution requires at least two parents");
    }
    if (tpl.kind != TemplateKind::IterInstruction) {
        raise(ErrorCode::DomainError, "iterative evolution needs an IterInstruction template");
    }
    return run_evolution(backend, render_iterative_prompt(parents, tpl), params, parse_retries);
}

EvolutionKind schedule_next(const GraphStats& stats, const RatioSchedule& schedule) {
    if (stats.retained_initial < schedule.min_initial_pool) {
        return EvolutionKind::Initial;
    }
    if (stats.retained_iterative * schedule.target_init <
        stats.retained_initial * schedule.target_iter) {
        return EvolutionKind::Iterative;
    }
    return EvolutionKind::Initial;
}

}  // namespace forge
