#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace forge {

using NodeId = std::int64_t;

enum class Origin { Initial, Iterative };
enum class SampleStatus { Candidate, Retained, Pruned };
enum class PruneReason { Syntax, Execution, Functionality };

const char* to_string(Origin origin);
const char* to_string(SampleStatus status);
const char* to_string(PruneReason reason);
Origin origin_from_string(const std::string& text);
SampleStatus status_from_string(const std::string& text);
PruneReason prune_reason_from_string(const std::string& text);

/// One private-library API: signature plus functional description.
struct ApiSpec {
    std::string api_id;
    std::string name;
    std::string signature;
    std::string description;
};

/// Reference to a parent node. Initial samples descend from API nodes,
/// iterative samples from earlier sample nodes.
struct ParentId {
    enum class Kind { Api, Sample };

    Kind kind{Kind::Api};
    std::string api_id;    // set when kind == Api
    NodeId sample_id{-1};  // set when kind == Sample

    static ParentId api(std::string id) {
        ParentId p;
        p.kind = Kind::Api;
        p.api_id = std::move(id);
        return p;
    }
    static ParentId sample(NodeId id) {
        ParentId p;
        p.kind = Kind::Sample;
        p.sample_id = id;
        return p;
    }

    friend auto operator<=>(const ParentId&, const ParentId&) = default;
};

/// A synthesized (requirement, solution) pair with provenance and status.
/// Pruned nodes are tombstoned: the record survives for audit but all
/// incident edges are removed.
struct SampleNode {
    NodeId node_id{-1};
    std::string requirement;
    std::string solution;
    Origin origin{Origin::Initial};
    std::vector<ParentId> parents;  // sorted, deduplicated
    SampleStatus status{SampleStatus::Candidate};
    std::optional<PruneReason> prune_reason;
};

struct GraphStats {
    std::size_t retained_initial{0};
    std::size_t retained_iterative{0};
    std::size_t pruned_syntax{0};
    std::size_t pruned_execution{0};
    std::size_t pruned_functionality{0};
    std::size_t candidates{0};

    std::size_t retained_total() const { return retained_initial + retained_iterative; }
    std::size_t pruned_total() const {
        return pruned_syntax + pruned_execution + pruned_functionality;
    }
};

struct DatasetRecord {
    std::string requirement;
    std::string solution;
    Origin origin{Origin::Initial};
    std::vector<ParentId> parent_ids;
    std::string library_name;
};

/// Export view of the graph: exactly the retained sample nodes, ordered by
/// node id so the emitted bytes are deterministic for a given graph.
struct TrainingDataset {
    std::vector<DatasetRecord> records;
};

/// The synthesis DAG: API nodes (no incoming edges), sample nodes, and
/// lineage edges recording which nodes each sample was synthesized from.
class SynthesisGraph {
public:
    using Edge = std::pair<ParentId, NodeId>;

    SynthesisGraph(std::vector<ApiSpec> catalog, std::string library_name);

    /// Inserts a candidate sample with one edge per parent. Node ids are
    /// monotonically increasing integers assigned at insertion.
    NodeId add_sample(Origin origin, std::string requirement, std::string solution,
                      std::vector<ParentId> parents);

    /// Tombstones a candidate: status becomes Pruned, incident edges are
    /// removed, the node record is kept for audit.
    void prune_node(NodeId id, PruneReason reason);

    void mark_retained(NodeId id);

    /// Uniform subset of API nodes without replacement; deterministic for a
    /// fixed rng_seed.
    std::vector<ApiSpec> sample_api_seeds(std::size_t count, std::uint64_t rng_seed) const;

    /// Uniform subset of Retained sample nodes; never returns candidates or
    /// pruned nodes.
    std::vector<const SampleNode*> sample_retained(std::size_t count,
                                                   std::uint64_t rng_seed) const;

    TrainingDataset export_dataset() const;

    GraphStats stats() const { return stats_; }

    const std::map<std::string, ApiSpec>& api_nodes() const { return api_nodes_; }
    const std::map<NodeId, SampleNode>& sample_nodes() const { return sample_nodes_; }
    const std::set<Edge>& edges() const { return edges_; }
    const std::string& library_name() const { return library_name_; }
    const SampleNode& node(NodeId id) const;
    bool has_api(const std::string& api_id) const { return api_nodes_.count(api_id) > 0; }

    /// Rebuilds a graph from checkpoint records, re-validating every
    /// structural invariant. Throws DomainError on inconsistency.
    static SynthesisGraph restore(std::vector<ApiSpec> catalog, std::string library_name,
                                  std::vector<SampleNode> samples,
                                  std::vector<Edge> edges);

private:
    SynthesisGraph() = default;

    const SampleNode& require_node(NodeId id) const;
    void recount();

    std::string library_name_;
    std::map<std::string, ApiSpec> api_nodes_;
    std::map<NodeId, SampleNode> sample_nodes_;
    std::set<Edge> edges_;
    NodeId next_id_{1};
    GraphStats stats_;
};

}  // namespace forge
