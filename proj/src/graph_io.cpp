#include "forge/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "forge/error.hpp"

namespace forge::graph_io {

using nlohmann::json;

namespace {

json require_field(const json& record, const char* field, const std::string& context) {
    if (!record.contains(field)) {
        raise(ErrorCode::SchemaViolation, context + ": missing field '" + field + "'");
    }
    return record.at(field);
}

std::string require_string(const json& record, const char* field,
                           const std::string& context) {
    json value = require_field(record, field, context);
    if (!value.is_string()) {
        raise(ErrorCode::SchemaViolation, context + ": field '" + field + "' must be a string");
    }
    return value.get<std::string>();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(ErrorCode::ConfigError, "cannot open '" + path.string() + "' for writing");
    }
    out << content;
    out.close();
    if (!out) {
        raise(ErrorCode::ConfigError, "failed writing '" + path.string() + "'");
    }
}

}  // namespace

json parent_to_json(const ParentId& parent) {
    if (parent.kind == ParentId::Kind::Api) {
        return json{{"kind", "api"}, {"id", parent.api_id}};
    }
    return json{{"kind", "sample"}, {"id", parent.sample_id}};
}

ParentId parent_from_json(const json& value) {
    const std::string kind = require_string(value, "kind", "parent record");
    if (kind == "api") {
        return ParentId::api(require_string(value, "id", "parent record"));
    }
    if (kind == "sample") {
        json id = require_field(value, "id", "parent record");
        if (!id.is_number_integer()) {
            raise(ErrorCode::SchemaViolation, "parent record: sample id must be an integer");
        }
        return ParentId::sample(id.get<NodeId>());
    }
    raise(ErrorCode::SchemaViolation, "parent record: unknown kind '" + kind + "'");
}

std::string checkpoint_to_string(const SynthesisGraph& graph,
                                 const nlohmann::json* pipeline_state) {
    std::ostringstream out;
    json header{{"format", kCheckpointFormat},
                {"version", kCheckpointVersion},
                {"library", graph.library_name()},
                {"api_count", graph.api_nodes().size()},
                {"sample_count", graph.sample_nodes().size()},
                {"edge_count", graph.edges().size()}};
    out << header.dump() << '\n';
    for (const auto& [id, spec] : graph.api_nodes()) {
        json record{{"record", "api"},
                    {"api_id", spec.api_id},
                    {"name", spec.name},
                    {"signature", spec.signature},
                    {"description", spec.description}};
        out << record.dump() << '\n';
    }
    for (const auto& [id, node] : graph.sample_nodes()) {
        json parents = json::array();
        for (const auto& parent : node.parents) parents.push_back(parent_to_json(parent));
        json record{{"record", "sample"},
                    {"node_id", node.node_id},
                    {"requirement", node.requirement},
                    {"solution", node.solution},
                    {"origin", to_string(node.origin)},
                    {"status", to_string(node.status)},
                    {"parents", parents}};
        if (node.prune_reason) {
            record["prune_reason"] = to_string(*node.prune_reason);
        }
        out << record.dump() << '\n';
    }
    for (const auto& [parent, child] : graph.edges()) {
        json record{{"record", "edge"}, {"parent", parent_to_json(parent)}, {"child", child}};
        out << record.dump() << '\n';
    }
    if (pipeline_state != nullptr && !pipeline_state->is_null()) {
        json record{{"record", "state"}, {"state", *pipeline_state}};
        out << record.dump() << '\n';
    }
    return out.str();
}

void save_checkpoint(const SynthesisGraph& graph, const std::filesystem::path& path,
                     const nlohmann::json* pipeline_state) {
    write_text_file(path, checkpoint_to_string(graph, pipeline_state));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::NoCheckpoint, "no checkpoint at '" + path.string() + "'");
    }

    std::string line;
    std::size_t line_no = 0;
    auto context = [&] { return path.filename().string() + " line " + std::to_string(line_no); };
    auto parse_line = [&](const std::string& text) {
        json record = json::parse(text, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            raise(ErrorCode::CorruptCheckpoint, context() + ": not a JSON record");
        }
        return record;
    };

    if (!std::getline(in, line)) {
        raise(ErrorCode::CorruptCheckpoint, "checkpoint is empty");
    }
    ++line_no;
    json header = parse_line(line);
    if (!header.contains("format") || header["format"] != kCheckpointFormat ||
        !header.contains("version")) {
        raise(ErrorCode::CorruptCheckpoint, "missing or unrecognized checkpoint header");
    }
    if (header["version"] != kCheckpointVersion) {
        raise(ErrorCode::CorruptCheckpoint,
              "unsupported checkpoint version " + header["version"].dump());
    }
    const std::string library = header.value("library", "");
    const auto expected_samples = header.value("sample_count", std::size_t{0});
    const auto expected_edges = header.value("edge_count", std::size_t{0});
    const auto expected_apis = header.value("api_count", std::size_t{0});

    std::vector<ApiSpec> catalog;
    std::vector<SampleNode> samples;
    std::vector<SynthesisGraph::Edge> edges;
    json state;

    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json record = parse_line(line);
            const std::string kind = require_string(record, "record", context());
            if (kind == "api") {
                ApiSpec spec;
                spec.api_id = require_string(record, "api_id", context());
                spec.name = require_string(record, "name", context());
                spec.signature = require_string(record, "signature", context());
                spec.description = require_string(record, "description", context());
                catalog.push_back(std::move(spec));
            } else if (kind == "sample") {
                SampleNode node;
                json id = require_field(record, "node_id", context());
                if (!id.is_number_integer()) {
                    raise(ErrorCode::SchemaViolation, context() + ": node_id must be an integer");
                }
                node.node_id = id.get<NodeId>();
                node.requirement = require_string(record, "requirement", context());
                node.solution = require_string(record, "solution", context());
                node.origin = origin_from_string(require_string(record, "origin", context()));
                node.status = status_from_string(require_string(record, "status", context()));
                if (record.contains("prune_reason")) {
                    node.prune_reason =
                        prune_reason_from_string(require_string(record, "prune_reason", context()));
                }
                json parents = require_field(record, "parents", context());
                if (!parents.is_array()) {
                    raise(ErrorCode::SchemaViolation, context() + ": parents must be an array");
                }
                for (const auto& parent : parents) {
                    node.parents.push_back(parent_from_json(parent));
                }
                samples.push_back(std::move(node));
            } else if (kind == "edge") {
                ParentId parent = parent_from_json(require_field(record, "parent", context()));
                json child = require_field(record, "child", context());
                if (!child.is_number_integer()) {
                    raise(ErrorCode::SchemaViolation, context() + ": child must be an integer");
                }
                edges.emplace_back(std::move(parent), child.get<NodeId>());
            } else if (kind == "state") {
                state = require_field(record, "state", context());
            } else {
                raise(ErrorCode::CorruptCheckpoint, context() + ": unknown record '" + kind + "'");
            }
        }
        if (catalog.size() != expected_apis || samples.size() != expected_samples ||
            edges.size() != expected_edges) {
            raise(ErrorCode::CorruptCheckpoint,
                  "record counts do not match header (file truncated?)");
        }
        SynthesisGraph graph = SynthesisGraph::restore(std::move(catalog), library,
                                                       std::move(samples), std::move(edges));
        return LoadedCheckpoint{std::move(graph), std::move(state)};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptCheckpoint) throw;
        raise(ErrorCode::CorruptCheckpoint, e.what());
    }
}

std::vector<ApiSpec> load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::ConfigError, "cannot open catalog '" + path.string() + "'");
    }
    std::vector<ApiSpec> catalog;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string context = path.filename().string() + " line " + std::to_string(line_no);
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            raise(ErrorCode::SchemaViolation, context + ": not a JSON record");
        }
        ApiSpec spec;
        spec.api_id = require_string(record, "api_id", context);
        spec.name = require_string(record, "name", context);
        spec.signature = require_string(record, "signature", context);
        spec.description = require_string(record, "description", context);
        catalog.push_back(std::move(spec));
    }
    return catalog;
}

std::string dataset_to_string(const TrainingDataset& dataset) {
    std::ostringstream out;
    for (const auto& record : dataset.records) {
        json parents = json::array();
        for (const auto& parent : record.parent_ids) parents.push_back(parent_to_json(parent));
        json row{{"requirement", record.requirement},
                 {"solution", record.solution},
                 {"origin", to_string(record.origin)},
                 {"parent_ids", parents},
                 {"library_name", record.library_name}};
        out << row.dump() << '\n';
    }
    return out.str();
}

void write_dataset(const TrainingDataset& dataset, const std::filesystem::path& path) {
    write_text_file(path, dataset_to_string(dataset));
}

}  // namespace forge::graph_io
