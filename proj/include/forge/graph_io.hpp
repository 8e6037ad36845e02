#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/graph.hpp"

namespace forge::graph_io {

inline constexpr const char* kCheckpointFormat = "forge-graph";
inline constexpr int kCheckpointVersion = 1;

/// Writes the whole graph as line-delimited JSON records under a versioned
/// header: apis, then samples, then edges, each section sorted by key, plus
/// an optional trailing pipeline-state record. Bytes are deterministic for a
/// given graph.
void save_checkpoint(const SynthesisGraph& graph, const std::filesystem::path& path,
                     const nlohmann::json* pipeline_state = nullptr);

std::string checkpoint_to_string(const SynthesisGraph& graph,
                                 const nlohmann::json* pipeline_state = nullptr);

struct LoadedCheckpoint {
    SynthesisGraph graph;
    nlohmann::json pipeline_state;  // null when the checkpoint carries none
};

/// Parses and re-validates a checkpoint. Any structural damage (truncated
/// line, bad record, invariant violation) surfaces as CorruptCheckpoint.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Loads a JSONL API catalog with fields (api_id, name, signature, description).
std::vector<ApiSpec> load_catalog(const std::filesystem::path& path);

std::string dataset_to_string(const TrainingDataset& dataset);
void write_dataset(const TrainingDataset& dataset, const std::filesystem::path& path);

nlohmann::json parent_to_json(const ParentId& parent);
ParentId parent_from_json(const nlohmann::json& value);

}  // namespace forge::graph_io
