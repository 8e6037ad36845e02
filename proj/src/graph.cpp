#include "forge/graph.hpp"

#include <algorithm>
#include <limits>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {

const char* to_string(Origin origin) {
    return origin == Origin::Initial ? "initial" : "iterative";
}

const char* to_string(SampleStatus status) {
    switch (status) {
        case SampleStatus::Candidate: return "candidate";
        case SampleStatus::Retained: return "retained";
        case SampleStatus::Pruned: return "pruned";
    }
    return "unknown";
}

const char* to_string(PruneReason reason) {
    switch (reason) {
        case PruneReason::Syntax: return "syntax";
        case PruneReason::Execution: return "execution";
        case PruneReason::Functionality: return "functionality";
    }
    return "unknown";
}

Origin origin_from_string(const std::string& text) {
    if (text == "initial") return Origin::Initial;
    if (text == "iterative") return Origin::Iterative;
    raise(ErrorCode::DomainError, "unknown origin '" + text + "'");
}

SampleStatus status_from_string(const std::string& text) {
    if (text == "candidate") return SampleStatus::Candidate;
    if (text == "retained") return SampleStatus::Retained;
    if (text == "pruned") return SampleStatus::Pruned;
    raise(ErrorCode::DomainError, "unknown status '" + text + "'");
}

PruneReason prune_reason_from_string(const std::string& text) {
    if (text == "syntax") return PruneReason::Syntax;
    if (text == "execution") return PruneReason::Execution;
    if (text == "functionality") return PruneReason::Functionality;
    raise(ErrorCode::DomainError, "unknown prune reason '" + text + "'");
}

SynthesisGraph::SynthesisGraph(std::vector<ApiSpec> catalog, std::string library_name)
    : library_name_(std::move(library_name)) {
    if (catalog.empty()) {
        raise(ErrorCode::EmptyCatalog, "API catalog must contain at least one entry");
    }
    for (auto& spec : catalog) {
        if (spec.api_id.empty() || spec.name.empty() || spec.signature.empty()) {
            raise(ErrorCode::DomainError,
                  "API spec requires non-empty api_id, name and signature (api_id='" +
                      spec.api_id + "')");
        }
        auto [it, inserted] = api_nodes_.emplace(spec.api_id, std::move(spec));
        if (!inserted) {
            raise(ErrorCode::DuplicateApiId, "api_id '" + it->first + "' appears twice");
        }
    }
}

const SampleNode& SynthesisGraph::require_node(NodeId id) const {
    auto it = sample_nodes_.find(id);
    if (it == sample_nodes_.end()) {
        raise(ErrorCode::UnknownNode, "no sample node with id " + std::to_string(id));
    }
    return it->second;
}

const SampleNode& SynthesisGraph::node(NodeId id) const { return require_node(id); }

NodeId SynthesisGraph::add_sample(Origin origin, std::string requirement,
                                  std::string solution, std::vector<ParentId> parents) {
    if (requirement.empty() || solution.empty()) {
        raise(ErrorCode::DomainError, "sample requirement and solution must be non-empty");
    }
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    if (parents.empty()) {
        raise(ErrorCode::DomainError, "sample node requires at least one parent");
    }
    for (const auto& parent : parents) {
        if (parent.kind == ParentId::Kind::Api) {
            if (origin != Origin::Initial) {
                raise(ErrorCode::OriginParentMismatch,
                      "iterative sample cannot have API parent '" + parent.api_id + "'");
            }
            if (!api_nodes_.count(parent.api_id)) {
                raise(ErrorCode::UnknownParent, "unknown API parent '" + parent.api_id + "'");
            }
        } else {
            if (origin == Origin::Initial) {
                raise(ErrorCode::OriginParentMismatch,
                      "initial sample cannot have sample parent " +
                          std::to_string(parent.sample_id));
            }
            auto it = sample_nodes_.find(parent.sample_id);
            if (it == sample_nodes_.end()) {
                raise(ErrorCode::UnknownParent,
                      "unknown sample parent " + std::to_string(parent.sample_id));
            }
            // Only retained nodes may become parents: pruning a parent later
            // would strip the child's edges and break the >=1-parent invariant.
            if (it->second.status != SampleStatus::Retained) {
                raise(ErrorCode::DomainError,
                      "sample parent " + std::to_string(parent.sample_id) +
                          " is not retained");
            }
        }
    }

    SampleNode node;
    node.node_id = next_id_++;
    node.requirement = std::move(requirement);
    node.solution = std::move(solution);
    node.origin = origin;
    node.parents = parents;
    node.status = SampleStatus::Candidate;
    for (const auto& parent : parents) {
        edges_.emplace(parent, node.node_id);
    }
    const NodeId id = node.node_id;
    sample_nodes_.emplace(id, std::move(node));
    ++stats_.candidates;
    return id;
}

void SynthesisGraph::prune_node(NodeId id, PruneReason reason) {
    auto it = sample_nodes_.find(id);
    if (it == sample_nodes_.end()) {
        raise(ErrorCode::UnknownNode, "no sample node with id " + std::to_string(id));
    }
    SampleNode& node = it->second;
    if (node.status != SampleStatus::Candidate) {
        raise(ErrorCode::AlreadyFinalized,
              "node " + std::to_string(id) + " is already " + to_string(node.status));
    }
    node.status = SampleStatus::Pruned;
    node.prune_reason = reason;
    for (const auto& parent : node.parents) {
        edges_.erase({parent, id});
    }
    // Candidates never have children (parents must be retained), but sweep
    // the outgoing range anyway so the invariant cannot silently rot.
    const ParentId self = ParentId::sample(id);
    auto lo = edges_.lower_bound({self, std::numeric_limits<NodeId>::min()});
    while (lo != edges_.end() && lo->first == self) {
        lo = edges_.erase(lo);
    }
    --stats_.candidates;
    switch (reason) {
        case PruneReason::Syntax: ++stats_.pruned_syntax; break;
        case PruneReason::Execution: ++stats_.pruned_execution; break;
        case PruneReason::Functionality: ++stats_.pruned_functionality; break;
    }
}

void SynthesisGraph::mark_retained(NodeId id) {
    auto it = sample_nodes_.find(id);
    if (it == sample_nodes_.end()) {
        raise(ErrorCode::UnknownNode, "no sample node with id " + std::to_string(id));
    }
    SampleNode& node = it->second;
    if (node.status != SampleStatus::Candidate) {
        raise(ErrorCode::AlreadyFinalized,
              "node " + std::to_string(id) + " is already " + to_string(node.status));
    }
    node.status = SampleStatus::Retained;
    --stats_.candidates;
    if (node.origin == Origin::Initial) {
        ++stats_.retained_initial;
    } else {
        ++stats_.retained_iterative;
    }
}

std::vector<ApiSpec> SynthesisGraph::sample_api_seeds(std::size_t count,
                                                      std::uint64_t rng_seed) const {
    if (count < 1 || count > api_nodes_.size()) {
        raise(ErrorCode::CountOutOfRange,
              "requested " + std::to_string(count) + " seeds from a catalog of " +
                  std::to_string(api_nodes_.size()));
    }
    std::vector<const ApiSpec*> ordered;
    ordered.reserve(api_nodes_.size());
    for (const auto& [id, spec] : api_nodes_) ordered.push_back(&spec);
    std::vector<ApiSpec> result;
    result.reserve(count);
    for (std::size_t idx : rng::sample_without_replacement(ordered.size(), count, rng_seed)) {
        result.push_back(*ordered[idx]);
    }
    return result;
}

std::vector<const SampleNode*> SynthesisGraph::sample_retained(std::size_t count,
                                                               std::uint64_t rng_seed) const {
    if (count < 1) {
        raise(ErrorCode::CountOutOfRange, "sample count must be >= 1");
    }
    std::vector<const SampleNode*> pool;
    for (const auto& [id, node] : sample_nodes_) {
        if (node.status == SampleStatus::Retained) pool.push_back(&node);
    }
    if (pool.size() < count) {
        raise(ErrorCode::InsufficientPool,
              "requested " + std::to_string(count) + " retained nodes, only " +
                  std::to_string(pool.size()) + " available");
    }
    std::vector<const SampleNode*> result;
    result.reserve(count);
    for (std::size_t idx : rng::sample_without_replacement(pool.size(), count, rng_seed)) {
        result.push_back(pool[idx]);
    }
    return result;
}

TrainingDataset SynthesisGraph::export_dataset() const {
    TrainingDataset dataset;
    for (const auto& [id, node] : sample_nodes_) {
        if (node.status != SampleStatus::Retained) continue;
        DatasetRecord record;
        record.requirement = node.requirement;
        record.solution = node.solution;
        record.origin = node.origin;
        record.parent_ids = node.parents;
        record.library_name = library_name_;
        dataset.records.push_back(std::move(record));
    }
    return dataset;
}

void SynthesisGraph::recount() {
    stats_ = GraphStats{};
    for (const auto& [id, node] : sample_nodes_) {
        switch (node.status) {
            case SampleStatus::Candidate:
                ++stats_.candidates;
                break;
            case SampleStatus::Retained:
                if (node.origin == Origin::Initial) {
                    ++stats_.retained_initial;
                } else {
                    ++stats_.retained_iterative;
                }
                break;
            case SampleStatus::Pruned:
                switch (node.prune_reason.value()) {
                    case PruneReason::Syntax: ++stats_.pruned_syntax; break;
                    case PruneReason::Execution: ++stats_.pruned_execution; break;
                    case PruneReason::Functionality: ++stats_.pruned_functionality; break;
                }
                break;
        }
    }
}

SynthesisGraph SynthesisGraph::restore(std::vector<ApiSpec> catalog,
                                       std::string library_name,
                                       std::vector<SampleNode> samples,
                                       std::vector<Edge> edges) {
    SynthesisGraph graph(std::move(catalog), std::move(library_name));
    for (auto& node : samples) {
        if (node.node_id < 1) {
            raise(ErrorCode::DomainError, "sample node id must be positive");
        }
        if (node.requirement.empty() || node.solution.empty()) {
            if (node.status != SampleStatus::Pruned) {
                raise(ErrorCode::DomainError,
                      "non-pruned node " + std::to_string(node.node_id) +
                          " has empty requirement or solution");
            }
        }
        if ((node.status == SampleStatus::Pruned) != node.prune_reason.has_value()) {
            raise(ErrorCode::DomainError,
                  "node " + std::to_string(node.node_id) +
                      ": pruned status and prune_reason must agree");
        }
        if (node.parents.empty()) {
            raise(ErrorCode::DomainError,
                  "node " + std::to_string(node.node_id) + " has no parents");
        }
        graph.next_id_ = std::max(graph.next_id_, node.node_id + 1);
        const NodeId id = node.node_id;
        if (!graph.sample_nodes_.emplace(id, std::move(node)).second) {
            raise(ErrorCode::DomainError, "duplicate node id " + std::to_string(id));
        }
    }
    for (const auto& [parent, child] : edges) {
        auto child_it = graph.sample_nodes_.find(child);
        if (child_it == graph.sample_nodes_.end()) {
            raise(ErrorCode::DomainError,
                  "edge child " + std::to_string(child) + " does not exist");
        }
        if (child_it->second.status == SampleStatus::Pruned) {
            raise(ErrorCode::DomainError,
                  "edge child " + std::to_string(child) + " is pruned");
        }
        if (parent.kind == ParentId::Kind::Api) {
            if (!graph.api_nodes_.count(parent.api_id)) {
                raise(ErrorCode::DomainError, "edge parent API '" + parent.api_id +
                                                  "' does not exist");
            }
        } else {
            auto parent_it = graph.sample_nodes_.find(parent.sample_id);
            if (parent_it == graph.sample_nodes_.end()) {
                raise(ErrorCode::DomainError,
                      "edge parent " + std::to_string(parent.sample_id) + " does not exist");
            }
            if (parent_it->second.status == SampleStatus::Pruned) {
                raise(ErrorCode::DomainError,
                      "edge parent " + std::to_string(parent.sample_id) + " is pruned");
            }
            if (parent.sample_id >= child) {
                raise(ErrorCode::DomainError,
                      "edge " + std::to_string(parent.sample_id) + "->" +
                          std::to_string(child) + " violates insertion order");
            }
        }
        const auto& child_parents = child_it->second.parents;
        if (std::find(child_parents.begin(), child_parents.end(), parent) ==
            child_parents.end()) {
            raise(ErrorCode::DomainError,
                  "edge into " + std::to_string(child) + " not listed among its parents");
        }
        if (!graph.edges_.emplace(parent, child).second) {
            raise(ErrorCode::DomainError, "duplicate edge to " + std::to_string(child));
        }
    }
    // non-pruned nodes must keep one live edge per recorded parent
    for (const auto& [id, node] : graph.sample_nodes_) {
        if (node.status == SampleStatus::Pruned) continue;
        for (const auto& parent : node.parents) {
            if (!graph.edges_.count({parent, id})) {
                raise(ErrorCode::DomainError,
                      "node " + std::to_string(id) + " lacks an edge from a recorded parent");
            }
        }
    }
    graph.recount();
    return graph;
}

}  // namespace forge
