#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forge/graph.hpp"

namespace forge {

enum class TemplateKind { InitInstruction, IterInstruction };

/// Instruction template for graph evolution. InitInstruction renders with a
/// set of API specs ({{api_specs}}), IterInstruction with parent samples
/// ({{parent_samples}}).
struct PromptTemplate {
    TemplateKind kind{TemplateKind::InitInstruction};
    std::string text;
};

/// Replaces every {{key}} from the map. Unknown tokens are left untouched so
/// literal braces in embedded code survive.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values);

/// Validates that the template text carries the placeholder its kind needs.
PromptTemplate make_template(TemplateKind kind, std::string text);
PromptTemplate load_template_file(TemplateKind kind, const std::filesystem::path& path);

std::string format_api_specs(const std::vector<ApiSpec>& specs);
std::string format_parent_samples(const std::vector<const SampleNode*>& parents);

// Shipped default prompt texts (original writing; see README for the full
// placeholder conventions).
namespace prompts {
PromptTemplate default_init_instruction();
PromptTemplate default_iter_instruction();
const std::string& test_generation();   // {{requirement}}, {{solution}}
const std::string& judge();             // {{requirement}}, {{solution}}
const std::string& decompose();         // {{requirement}}
const std::string& rerank();            // {{requirement}}, {{api_candidates}}
const std::string& solve_vanilla();     // {{requirement}}
const std::string& solve_with_docs();   // {{requirement}}, {{api_specs}}
}  // namespace prompts

}  // namespace forge
