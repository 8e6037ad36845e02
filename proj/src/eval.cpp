#include "forge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "forge/error.hpp"
#include "forge/evolution.hpp"
#include "forge/prompts.hpp"
#include "forge/pruning.hpp"

namespace forge {

using nlohmann::json;

namespace {

json require_field(const json& record, const char* field, const std::string& context) {
    if (!record.contains(field)) {
        raise(ErrorCode::SchemaViolation, context + ": missing field '" + field + "'");
    }
    return record.at(field);
}

std::string require_string(const json& record, const char* field, const std::string& context) {
    json value = require_field(record, field, context);
    if (!value.is_string() || value.get<std::string>().empty()) {
        raise(ErrorCode::SchemaViolation,
              context + ": field '" + field + "' must be a non-empty string");
    }
    return value.get<std::string>();
}

std::vector<std::string> require_string_array(const json& record, const char* field,
                                              const std::string& context, bool allow_empty) {
    json value = require_field(record, field, context);
    if (!value.is_array()) {
        raise(ErrorCode::SchemaViolation, context + ": field '" + field + "' must be an array");
    }
    std::vector<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string() || item.get<std::string>().empty()) {
            raise(ErrorCode::SchemaViolation,
                  context + ": field '" + field + "' must hold non-empty strings");
        }
        out.push_back(item.get<std::string>());
    }
    if (out.empty() && !allow_empty) {
        raise(ErrorCode::SchemaViolation, context + ": field '" + field + "' must be non-empty");
    }
    return out;
}

}  // namespace

std::vector<BenchmarkInstance> load_benchmark(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::ConfigError, "cannot open benchmark '" + path.string() + "'");
    }
    std::vector<BenchmarkInstance> instances;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string context =
            path.filename().string() + " line " + std::to_string(line_no);
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            raise(ErrorCode::SchemaViolation, context + ": not a JSON record");
        }
        BenchmarkInstance instance;
        instance.instance_id = require_string(record, "instance_id", context);
        instance.requirement = require_string(record, "requirement", context);
        instance.tests = require_string_array(record, "tests", context, /*allow_empty=*/false);
        instance.reference_solution = require_string(record, "reference_solution", context);
        instance.required_api_ids =
            require_string_array(record, "required_api_ids", context, /*allow_empty=*/true);
        if (!seen_ids.insert(instance.instance_id).second) {
            raise(ErrorCode::DuplicateInstanceId,
                  context + ": instance_id '" + instance.instance_id + "' repeats");
        }
        instances.push_back(std::move(instance));
    }
    return instances;
}

const char* to_string(PromptMode mode) {
    switch (mode) {
        case PromptMode::Vanilla: return "vanilla";
        case PromptMode::Oracle: return "oracle";
        case PromptMode::NaiveRag: return "naive-rag";
        case PromptMode::EpiGen: return "epigen";
        case PromptMode::Capir: return "capir";
    }
    return "unknown";
}

PromptMode prompt_mode_from_string(const std::string& text) {
    if (text == "vanilla") return PromptMode::Vanilla;
    if (text == "oracle") return PromptMode::Oracle;
    if (text == "naive-rag" || text == "naiverag") return PromptMode::NaiveRag;
    if (text == "epigen") return PromptMode::EpiGen;
    if (text == "capir") return PromptMode::Capir;
    raise(ErrorCode::ConfigError, "unknown evaluation mode '" + text + "'");
}

bool is_rag_mode(PromptMode mode) {
    return mode == PromptMode::NaiveRag || mode == PromptMode::EpiGen ||
           mode == PromptMode::Capir;
}

std::string build_prompt(const BenchmarkInstance& instance, PromptMode mode,
                         const std::map<std::string, ApiSpec>& catalog,
                         const std::optional<std::vector<ApiSpec>>& retrieval_result) {
    if (mode == PromptMode::Vanilla) {
        return render_template(prompts::solve_vanilla(),
                               {{"requirement", instance.requirement}});
    }
    std::vector<ApiSpec> specs;
    if (mode == PromptMode::Oracle) {
        specs.reserve(instance.required_api_ids.size());
        for (const auto& api_id : instance.required_api_ids) {
            auto it = catalog.find(api_id);
            if (it == catalog.end()) {
                raise(ErrorCode::UnknownApiId,
                      "instance '" + instance.instance_id + "' requires unknown API '" +
                          api_id + "'");
            }
            specs.push_back(it->second);
        }
    } else {
        if (!retrieval_result.has_value() || retrieval_result->empty()) {
            raise(ErrorCode::MissingRetrieval,
                  std::string(to_string(mode)) + " prompting requires a retrieval result");
        }
        specs = *retrieval_result;
    }
    return render_template(prompts::solve_with_docs(),
                           {{"requirement", instance.requirement},
                            {"api_specs", format_api_specs(specs)}});
}

void validate(const InstanceScore& score) {
    if (score.n < 0 || score.c_pass < 0 || score.c_exec < 0 || score.c_pass > score.c_exec ||
        score.c_exec > score.n) {
        raise(ErrorCode::DomainError,
              "instance score must satisfy 0 <= c_pass <= c_exec <= n");
    }
}

double pass_at_k(int n, int c, int k) {
    if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
        raise(ErrorCode::DomainError,
              "pass@k needs 0 <= c <= n and 1 <= k <= n (got n=" + std::to_string(n) +
                  " c=" + std::to_string(c) + " k=" + std::to_string(k) + ")");
    }
    if (n - c < k) return 1.0;
    double product = 1.0;
    for (int i = 0; i < k; ++i) {
        product *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    }
    return 1.0 - product;
}

double exec_at_k(int n, int c_exec, int k) { return pass_at_k(n, c_exec, k); }

std::string joined_tests(const BenchmarkInstance& instance) {
    std::string joined;
    for (const auto& test : instance.tests) {
        joined += test;
        joined += "\n\n";
    }
    return joined;
}

InstanceScore score_instance(CompletionBackend& backend, const Sandbox& sandbox,
                             const BenchmarkInstance& instance, const std::string& prompt,
                             const SamplingParams& params) {
    if (params.n < 1) {
        raise(ErrorCode::DomainError, "score_instance needs n >= 1");
    }
    const std::vector<std::string> completions = backend.complete(prompt, params);
    const std::string tests = joined_tests(instance);

    InstanceScore score;
    score.n = params.n;
    for (const auto& completion : completions) {
        const auto code = extract_first_code_block(completion);
        if (!code) continue;  // counted in n, in neither c_pass nor c_exec
        const SyntaxResult syntax =
            verify_syntax(*code, "python3", sandbox.config().interpreter_path);
        if (!syntax.ok) continue;  // non-parsing candidates never execute
        if (sandbox.run_with_tests(*code, tests).passed()) ++score.c_pass;
        if (sandbox.run_exec_only(*code, tests).passed()) ++score.c_exec;
    }
    validate(score);
    return score;
}

EvalReport aggregate(const std::vector<InstanceResult>& results, const std::vector<int>& ks,
                     PromptMode mode, json metadata) {
    if (ks.empty()) {
        raise(ErrorCode::DomainError, "at least one k is required");
    }
    EvalReport report;
    report.mode = mode;
    report.ks = ks;
    report.instances = results;
    report.metadata = std::move(metadata);

    int common_n = -1;
    for (const auto& result : results) {
        if (!result.score) {
            ++report.unevaluated;
            continue;
        }
        validate(*result.score);
        if (common_n < 0) {
            common_n = result.score->n;
        } else if (result.score->n != common_n) {
            raise(ErrorCode::InconsistentN,
                  "instance '" + result.instance_id + "' was scored with n=" +
                      std::to_string(result.score->n) + ", expected " +
                      std::to_string(common_n));
        }
        ++report.evaluated;
    }
    if (report.evaluated == 0) {
        raise(ErrorCode::DomainError, "no evaluated instances to aggregate");
    }
    report.n = common_n;
    for (int k : ks) {
        if (k < 1 || k > common_n) {
            raise(ErrorCode::DomainError,
                  "k=" + std::to_string(k) + " exceeds n=" + std::to_string(common_n));
        }
        double pass_sum = 0.0;
        double exec_sum = 0.0;
        for (const auto& result : results) {
            if (!result.score) continue;
            pass_sum += pass_at_k(result.score->n, result.score->c_pass, k);
            exec_sum += exec_at_k(result.score->n, result.score->c_exec, k);
        }
        report.pass_at[k] = pass_sum / static_cast<double>(report.evaluated);
        report.exec_at[k] = exec_sum / static_cast<double>(report.evaluated);
    }
    return report;
}

void verify_reference(const Sandbox& sandbox, const BenchmarkInstance& instance) {
    const ExecutionReport report =
        sandbox.run_with_tests(instance.reference_solution, joined_tests(instance));
    if (!report.passed()) {
        raise(ErrorCode::DomainError,
              "reference solution of '" + instance.instance_id + "' does not pass its tests (" +
                  std::string(to_string(report.outcome)) + ")\n" + report.stderr_text);
    }
}

json EvalReport::to_json() const {
    json per_instance = json::array();
    for (const auto& result : instances) {
        json row{{"instance_id", result.instance_id}};
        if (result.score) {
            row["n"] = result.score->n;
            row["c_pass"] = result.score->c_pass;
            row["c_exec"] = result.score->c_exec;
        } else {
            row["unevaluated"] = true;
            row["failure"] = result.failure;
        }
        per_instance.push_back(std::move(row));
    }
    json aggregates = json::object();
    for (int k : ks) {
        aggregates["pass@" + std::to_string(k)] = pass_at.at(k);
        aggregates["exec@" + std::to_string(k)] = exec_at.at(k);
    }
    return json{{"mode", to_string(mode)},
                {"n", n},
                {"evaluated", evaluated},
                {"unevaluated", unevaluated},
                {"aggregates", aggregates},
                {"instances", per_instance},
                {"metadata", metadata}};
}

std::string EvalReport::to_record_lines() const {
    std::ostringstream out;
    out << json{{"record", "header"},
                {"mode", to_string(mode)},
                {"n", n},
                {"evaluated", evaluated},
                {"unevaluated", unevaluated},
                {"metadata", metadata}}
               .dump()
        << '\n';
    for (const auto& result : instances) {
        json row{{"record", "instance"}, {"instance_id", result.instance_id}};
        if (result.score) {
            row["n"] = result.score->n;
            row["c_pass"] = result.score->c_pass;
            row["c_exec"] = result.score->c_exec;
        } else {
            row["unevaluated"] = true;
            row["failure"] = result.failure;
        }
        out << row.dump() << '\n';
    }
    json aggregates = json::object();
    for (int k : ks) {
        aggregates["pass@" + std::to_string(k)] = pass_at.at(k);
        aggregates["exec@" + std::to_string(k)] = exec_at.at(k);
    }
    out << json{{"record", "aggregates"}, {"values", aggregates}}.dump() << '\n';
    return out.str();
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out << "mode: " << to_string(mode) << "  n=" << n << "  instances evaluated=" << evaluated
        << " unevaluated=" << unevaluated << "\n";
    out << "  k      pass@k     exec@k\n";
    out.setf(std::ios::fixed);
    out.precision(4);
    for (int k : ks) {
        out << "  " << k << "      " << pass_at.at(k) << "     " << exec_at.at(k) << "\n";
    }
    return out.str();
}

}  // namespace forge
