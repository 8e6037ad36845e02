// forge: synthesis-graph pipeline CLI.
//
// Exit codes: 0 success, 1 warning (empty export / partial evaluation),
// 2 configuration or input error, 3 backend error, 4 sandbox error.

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "forge/error.hpp"
#include "forge/pipeline.hpp"

namespace {

int exit_code_for(forge::ErrorCode code) {
    using forge::ErrorCode;
    switch (code) {
        case ErrorCode::BackendFailure:
        case ErrorCode::Timeout:
        case ErrorCode::RateLimited:
        case ErrorCode::AuthFailure:
        case ErrorCode::ProtocolError:
        case ErrorCode::UnscriptedPrompt:
        case ErrorCode::EmbedServiceFailure:
        case ErrorCode::MalformedCompletion:
        case ErrorCode::NoValidTests:
        case ErrorCode::UnparseableVerdict:
            return 3;
        case ErrorCode::SandboxUnavailable:
            return 4;
        default:
            return 2;
    }
}

std::vector<int> parse_ks(const std::string& text) {
    std::vector<int> ks;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        ks.push_back(std::stoi(item));
    }
    if (ks.empty()) {
        forge::raise(forge::ErrorCode::ConfigError, "--k must list at least one value");
    }
    return ks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: synthesizes verified private-library training data by growing and "
                 "pruning a synthesis graph, and evaluates model endpoints with unbiased "
                 "pass@k / exec@k"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string benchmark_path;
    std::string mode_text = "vanilla";
    std::string ks_text = "1,3,5";
    std::string checkpoint_path;

    auto* synth = app.add_subcommand("synthesize", "run the evolve/prune loop to the target size");
    synth->add_option("--config", config_path, "pipeline config file")->required();

    auto* exp = app.add_subcommand("export", "write the retained samples as a training dataset");
    exp->add_option("--config", config_path, "pipeline config file")->required();
    exp->add_option("--out", out_path, "output path (defaults to export_path from the config)");

    auto* eval = app.add_subcommand("evaluate", "score a model endpoint on a benchmark");
    eval->add_option("--config", config_path, "pipeline config file")->required();
    eval->add_option("--benchmark", benchmark_path, "benchmark JSONL file")->required();
    eval->add_option("--mode", mode_text, "vanilla|oracle|naive-rag|epigen|capir");
    eval->add_option("--k", ks_text, "comma-separated k values");
    eval->add_option("--out", out_path, "report output path");

    auto* inspect = app.add_subcommand("inspect", "print statistics of a graph checkpoint");
    inspect->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            forge::Pipeline pipeline(forge::load_config(config_path));
            forge::RunReport report = pipeline.synthesize();
            std::cout << report.to_json().dump(2) << "\n";
            return 0;
        }
        if (exp->parsed()) {
            forge::Pipeline pipeline(forge::load_config(config_path));
            std::optional<std::filesystem::path> out;
            if (!out_path.empty()) out = out_path;
            const std::size_t count = pipeline.export_dataset(out);
            const auto where = out.value_or(pipeline.config().export_path);
            std::cout << "wrote " << count << " records to " << where.string() << "\n";
            if (count == 0) {
                std::cerr << "[warn] graph has no retained samples; export is empty\n";
                return 1;
            }
            return 0;
        }
        if (eval->parsed()) {
            forge::Pipeline pipeline(forge::load_config(config_path));
            const auto mode = forge::prompt_mode_from_string(mode_text);
            std::optional<std::filesystem::path> out;
            if (!out_path.empty()) out = out_path;
            forge::EvalReport report =
                pipeline.evaluate(benchmark_path, mode, parse_ks(ks_text), out);
            std::cout << report.to_table();
            if (report.unevaluated > 0) {
                std::cerr << "[warn] " << report.unevaluated
                          << " instance(s) were not evaluated due to infrastructure failures\n";
                return 1;
            }
            return 0;
        }
        if (inspect->parsed()) {
            const auto summary = forge::inspect_checkpoint(checkpoint_path);
            std::cout << forge::inspect_to_text(summary);
            return 0;
        }
    } catch (const forge::Error& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return 2;
    }
    return 2;
}
