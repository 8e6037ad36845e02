#include "forge/prompts.hpp"

#include <fstream>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values) {
    std::string out = text;
    for (const auto& [key, value] : values) {
        const std::string token = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return out;
}

PromptTemplate make_template(TemplateKind kind, std::string text) {
    const char* required =
        kind == TemplateKind::InitInstruction ? "{{api_specs}}" : "{{parent_samples}}";
    if (text.find(required) == std::string::npos) {
        raise(ErrorCode::ConfigError,
              std::string("template is missing required placeholder ") + required);
    }
    return PromptTemplate{kind, std::move(text)};
}

PromptTemplate load_template_file(TemplateKind kind, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::ConfigError, "cannot open template '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return make_template(kind, buffer.str());
}

std::string format_api_specs(const std::vector<ApiSpec>& specs) {
    std::ostringstream out;
    for (const auto& spec : specs) {
        out << "API: " << spec.name << "\n"
            << "Signature: " << spec.signature << "\n"
            << "Description: " << spec.description << "\n\n";
    }
    return out.str();
}

std::string format_parent_samples(const std::vector<const SampleNode*>& parents) {
    std::ostringstream out;
    std::size_t index = 1;
    for (const SampleNode* parent : parents) {
        out << "Sample " << index++ << "\n"
            << "Requirement: " << parent->requirement << "\n"
            << "Solution:\n```python\n"
            << parent->solution << "\n```\n\n";
    }
    return out.str();
}

namespace prompts {

PromptTemplate default_init_instruction() {
    return make_template(TemplateKind::InitInstruction, R"(You are preparing training data for a private software library that the rest of the world has never seen.

Here are specifications of selected APIs from that library:

{{api_specs}}
Write ONE self-contained coding task that a developer using this library might realistically face, together with a complete reference solution. Prefer tasks that combine the listed APIs, but you do not have to invoke every one of them.

Answer in exactly this format:

Requirement: <one or two sentences describing the task>

```python
<complete solution code>
```
)");
}

PromptTemplate default_iter_instruction() {
    return make_template(TemplateKind::IterInstruction, R"(Below are existing training samples for a private software library. Each has a coding requirement and a reference solution:

{{parent_samples}}
Integrate the ideas above into ONE new, single, coherent coding task that is more diverse and more demanding than any sample alone, and write a complete reference solution that satisfies it through coordinated use of the library.

Answer in exactly this format:

Requirement: <one or two sentences describing the new task>

```python
<complete solution code>
```
)");
}

const std::string& test_generation() {
    static const std::string text = R"(You are reviewing a synthesized training sample for a private software library.

Requirement: {{requirement}}

Solution:
```python
{{solution}}
```

Write 3 to 5 small unit tests for this solution. Each test must be a standalone Python snippet using plain `assert` statements (no test framework), with representative inputs and the assertion on the expected result. Put every test in its own fenced code block.
)";
    return text;
}

const std::string& judge() {
    static const std::string text = R"(Assess the following synthesized training sample for a private software library.

Requirement: {{requirement}}

Solution:
```python
{{solution}}
```

Decide two things:
1. realistic: is the requirement a realistic, well-defined task a developer could face?
2. satisfies: does the solution truly satisfy the requirement in intent?

Answer with a single fenced JSON block holding exactly these fields:

```json
{"realistic": "yes|no", "satisfies": "yes|no", "rationale": "<one sentence>"}
```
)";
    return text;
}

const std::string& decompose() {
    static const std::string text = R"(Decompose the following coding requirement into the minimal sequence of concrete subtasks a developer would implement. Answer with a numbered list, one subtask per line, and nothing else.

Requirement: {{requirement}}
)";
    return text;
}

const std::string& rerank() {
    static const std::string text = R"(A developer must solve this coding requirement:

{{requirement}}

These candidate library APIs were retrieved from documentation:

{{api_candidates}}

Rank the candidate APIs from most to least relevant for solving the requirement. Answer with one api_id per line, most relevant first, and nothing else.
)";
    return text;
}

const std::string& solve_vanilla() {
    static const std::string text = R"(Write a complete Python solution for the following task. Answer with a single fenced code block and nothing else.

Task: {{requirement}}
)";
    return text;
}

const std::string& solve_with_docs() {
    static const std::string text = R"(Write a complete Python solution for the following task. Answer with a single fenced code block and nothing else.

Task: {{requirement}}

Relevant library API documentation:

{{api_specs}}
)";
    return text;
}

}  // namespace prompts

}  // namespace forge
