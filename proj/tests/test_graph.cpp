#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "forge/error.hpp"
#include "forge/graph.hpp"
#include "forge/graph_io.hpp"
#include "forge/rng.hpp"
#include "test_support.hpp"

using namespace forge;

namespace {

NodeId add_retained(SynthesisGraph& graph, Origin origin, std::vector<ParentId> parents,
                    const std::string& tag) {
    const NodeId id = graph.add_sample(origin, "req " + tag, "def f(): pass  # " + tag,
                                       std::move(parents));
    graph.mark_retained(id);
    return id;
}

// Structural invariant sweep used by the randomized operation test.
void check_invariants(const SynthesisGraph& graph) {
    for (const auto& [parent, child] : graph.edges()) {
        // every edge's child is a sample node that exists and is not pruned
        REQUIRE(graph.sample_nodes().count(child) == 1);
        REQUIRE(graph.node(child).status != SampleStatus::Pruned);
        if (parent.kind == ParentId::Kind::Api) {
            REQUIRE(graph.api_nodes().count(parent.api_id) == 1);
        } else {
            REQUIRE(graph.sample_nodes().count(parent.sample_id) == 1);
            REQUIRE(graph.node(parent.sample_id).status != SampleStatus::Pruned);
            // acyclicity: lineage edges always point from older to newer ids
            REQUIRE(parent.sample_id < child);
        }
    }
    std::size_t retained = 0;
    for (const auto& [id, node] : graph.sample_nodes()) {
        if (node.status == SampleStatus::Retained) ++retained;
        if (node.status == SampleStatus::Pruned) {
            REQUIRE(node.prune_reason.has_value());
            for (const auto& [parent, child] : graph.edges()) {
                REQUIRE(child != id);
                if (parent.kind == ParentId::Kind::Sample) {
                    REQUIRE(parent.sample_id != id);
                }
            }
        } else {
            REQUIRE(node.prune_reason == std::nullopt);
        }
    }
    const GraphStats stats = graph.stats();
    REQUIRE(stats.retained_total() == retained);
    REQUIRE(stats.retained_total() + stats.pruned_total() + stats.candidates ==
            graph.sample_nodes().size());
    REQUIRE(graph.export_dataset().records.size() == retained);
}

}  // namespace

TEST_CASE("new graph holds exactly the catalog") {
    // a production-sized catalog
    SynthesisGraph graph(test::make_catalog(179), "bignum");
    CHECK(graph.api_nodes().size() == 179);
    CHECK(graph.sample_nodes().empty());
    CHECK(graph.edges().empty());

    SynthesisGraph tiny(test::make_catalog(1), "tiny");
    CHECK(tiny.api_nodes().size() == 1);
}

TEST_CASE("duplicate api ids and empty catalogs are rejected") {
    auto catalog = test::make_catalog(3);
    catalog.push_back(catalog.front());
    CHECK_THROWS_WITH_AS(SynthesisGraph(catalog, "x"), doctest::Contains("lib.fn0"), Error);
    try {
        SynthesisGraph g(catalog, "x");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateApiId);
    }
    CHECK_THROWS_AS(SynthesisGraph({}, "x"), Error);
}

TEST_CASE("add_sample inserts candidates with one edge per parent") {
    SynthesisGraph graph(test::make_catalog(5), "lib");
    const NodeId id = graph.add_sample(
        Origin::Initial, "req", "code",
        {ParentId::api("lib.fn0"), ParentId::api("lib.fn1"), ParentId::api("lib.fn2")});
    CHECK(graph.edges().size() == 3);
    CHECK(graph.node(id).status == SampleStatus::Candidate);

    const NodeId second = graph.add_sample(Origin::Initial, "req2", "code2",
                                           {ParentId::api("lib.fn0")});
    CHECK(second != id);
    CHECK(second > id);
}

TEST_CASE("add_sample validates parent kinds and existence") {
    SynthesisGraph graph(test::make_catalog(3), "lib");
    const NodeId base = add_retained(graph, Origin::Initial, {ParentId::api("lib.fn0")}, "a");

    // iterative with an API parent violates the origin rule
    try {
        graph.add_sample(Origin::Iterative, "r", "y",
                         {ParentId::sample(base), ParentId::api("lib.fn1")});
        FAIL("expected OriginParentMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OriginParentMismatch);
    }
    try {
        graph.add_sample(Origin::Initial, "r", "y", {ParentId::api("lib.missing")});
        FAIL("expected UnknownParent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownParent);
    }
    try {
        graph.add_sample(Origin::Iterative, "r", "y", {ParentId::sample(9999)});
        FAIL("expected UnknownParent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownParent);
    }
}

TEST_CASE("prune removes incident edges and keeps the tombstone") {
    SynthesisGraph graph(test::make_catalog(4), "lib");
    const NodeId id = graph.add_sample(Origin::Initial, "r", "y",
                                       {ParentId::api("lib.fn0"), ParentId::api("lib.fn1")});
    CHECK(graph.edges().size() == 2);
    graph.prune_node(id, PruneReason::Syntax);
    CHECK(graph.edges().empty());
    CHECK(graph.node(id).status == SampleStatus::Pruned);
    CHECK(graph.node(id).prune_reason == PruneReason::Syntax);

    // second prune trips the idempotence guard
    try {
        graph.prune_node(id, PruneReason::Execution);
        FAIL("expected AlreadyFinalized");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AlreadyFinalized);
    }
    try {
        graph.prune_node(424242, PruneReason::Syntax);
        FAIL("expected UnknownNode");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownNode);
    }
}

TEST_CASE("mark_retained finalizes candidates exactly once") {
    SynthesisGraph graph(test::make_catalog(2), "lib");
    const NodeId id = graph.add_sample(Origin::Initial, "r", "y", {ParentId::api("lib.fn0")});
    CHECK(graph.stats().retained_total() == 0);
    graph.mark_retained(id);
    CHECK(graph.stats().retained_initial == 1);
    CHECK(graph.stats().retained_total() == 1);

    const NodeId pruned = graph.add_sample(Origin::Initial, "r2", "y2",
                                           {ParentId::api("lib.fn0")});
    graph.prune_node(pruned, PruneReason::Execution);
    try {
        graph.mark_retained(pruned);
        FAIL("expected AlreadyFinalized");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AlreadyFinalized);
    }
}

TEST_CASE("sample_api_seeds: bounds, determinism, full catalog") {
    SynthesisGraph graph(test::make_catalog(4), "lib");
    CHECK_THROWS_AS((void)graph.sample_api_seeds(0, 1), Error);
    CHECK_THROWS_AS((void)graph.sample_api_seeds(5, 1), Error);

    auto full = graph.sample_api_seeds(4, 7);
    CHECK(full.size() == 4);
    std::set<std::string> ids;
    for (const auto& spec : full) ids.insert(spec.api_id);
    CHECK(ids.size() == 4);

    auto a = graph.sample_api_seeds(2, 99);
    auto b = graph.sample_api_seeds(2, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].api_id == b[i].api_id);
}

TEST_CASE("sample_api_seeds draws pairs uniformly") {
    // oracle: enumerate all C(4,2)=6 pairs; over 10k draws each pair should
    // appear with frequency 1/6 within +-0.02
    SynthesisGraph graph(test::make_catalog(4), "lib");
    std::map<std::pair<std::string, std::string>, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto pair = graph.sample_api_seeds(2, 1000 + static_cast<std::uint64_t>(i));
        REQUIRE(pair.size() == 2);
        counts[{pair[0].api_id, pair[1].api_id}]++;
    }
    CHECK(counts.size() == 6);
    for (const auto& [key, count] : counts) {
        const double freq = static_cast<double>(count) / draws;
        CHECK(freq == doctest::Approx(1.0 / 6.0).epsilon(0.12));
        CHECK(std::abs(freq - 1.0 / 6.0) <= 0.02);
    }
}

TEST_CASE("sample_retained draws only retained nodes, deterministically") {
    SynthesisGraph graph(test::make_catalog(3), "lib");
    const NodeId kept = add_retained(graph, Origin::Initial, {ParentId::api("lib.fn0")}, "kept");
    const NodeId candidate =
        graph.add_sample(Origin::Initial, "cand", "y", {ParentId::api("lib.fn1")});
    const NodeId pruned =
        graph.add_sample(Origin::Initial, "pruned", "y", {ParentId::api("lib.fn2")});
    graph.prune_node(pruned, PruneReason::Functionality);

    try {
        (void)graph.sample_retained(2, 5);
        FAIL("expected InsufficientPool");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientPool);
    }

    auto picked = graph.sample_retained(1, 5);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0]->node_id == kept);
    CHECK(picked[0]->status == SampleStatus::Retained);
    CHECK(picked[0]->node_id != candidate);

    add_retained(graph, Origin::Initial, {ParentId::api("lib.fn1")}, "kept2");
    auto first = graph.sample_retained(2, 11);
    auto second = graph.sample_retained(2, 11);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i]->node_id == second[i]->node_id);
    }
}

TEST_CASE("export_dataset emits exactly the retained nodes in id order") {
    SynthesisGraph graph(test::make_catalog(4), "lib");
    CHECK(graph.export_dataset().records.empty());

    for (int i = 0; i < 10; ++i) {
        add_retained(graph, Origin::Initial, {ParentId::api("lib.fn0")}, std::to_string(i));
    }
    for (int i = 0; i < 4; ++i) {
        const NodeId id = graph.add_sample(Origin::Initial, "bad " + std::to_string(i), "y",
                                           {ParentId::api("lib.fn1")});
        graph.prune_node(id, PruneReason::Syntax);
    }
    const TrainingDataset dataset = graph.export_dataset();
    CHECK(dataset.records.size() == 10);
    for (const auto& record : dataset.records) {
        CHECK(record.library_name == "lib");
        CHECK(record.origin == Origin::Initial);
    }
}

TEST_CASE("export_dataset reaches the production target size") {
    // a production-sized export
    SynthesisGraph graph(test::make_catalog(8), "lib");
    for (int i = 0; i < 20000; ++i) {
        add_retained(graph, Origin::Initial,
                     {ParentId::api("lib.fn" + std::to_string(i % 8))}, std::to_string(i));
    }
    CHECK(graph.export_dataset().records.size() == 20000);
}

TEST_CASE("stats tracks statuses and the accounting identity") {
    SynthesisGraph graph(test::make_catalog(3), "lib");
    GraphStats fresh = graph.stats();
    CHECK(fresh.retained_total() == 0);
    CHECK(fresh.pruned_total() == 0);
    CHECK(fresh.candidates == 0);

    for (int i = 0; i < 3; ++i) {
        add_retained(graph, Origin::Initial, {ParentId::api("lib.fn0")}, std::to_string(i));
    }
    CHECK(graph.stats().retained_initial == 3);

    const NodeId a = graph.add_sample(Origin::Initial, "pa", "y", {ParentId::api("lib.fn1")});
    graph.prune_node(a, PruneReason::Syntax);
    const NodeId b = graph.add_sample(Origin::Initial, "pb", "y", {ParentId::api("lib.fn1")});
    graph.prune_node(b, PruneReason::Execution);

    const GraphStats stats = graph.stats();
    CHECK(stats.pruned_syntax + stats.pruned_execution + stats.pruned_functionality ==
          stats.pruned_total());
    CHECK(stats.pruned_total() == 2);
}

TEST_CASE("random operation sequences preserve every graph invariant") {
    // 200 sequences here; the acceptance suite runs 1000
    for (std::uint64_t round = 0; round < 200; ++round) {
        rng::SplitMix rng(round * 7919 + 13);
        SynthesisGraph graph(test::make_catalog(5), "lib");
        std::vector<NodeId> candidates;
        std::vector<NodeId> retained;
        for (int step = 0; step < 30; ++step) {
            const std::uint64_t op = rng.below(4);
            if (op == 0 || candidates.empty()) {
                const bool iterative = !retained.empty() && rng.below(2) == 0;
                std::vector<ParentId> parents;
                if (iterative) {
                    const std::size_t m = 1 + rng.below(std::min<std::size_t>(3, retained.size()));
                    for (std::size_t i = 0; i < m; ++i) {
                        parents.push_back(
                            ParentId::sample(retained[rng.below(retained.size())]));
                    }
                } else {
                    const std::size_t m = 1 + rng.below(3);
                    for (std::size_t i = 0; i < m; ++i) {
                        parents.push_back(
                            ParentId::api("lib.fn" + std::to_string(rng.below(5))));
                    }
                }
                const NodeId id = graph.add_sample(
                    iterative ? Origin::Iterative : Origin::Initial,
                    "req " + std::to_string(round) + "/" + std::to_string(step), "y",
                    std::move(parents));
                candidates.push_back(id);
            } else if (op == 1) {
                const std::size_t pick = rng.below(candidates.size());
                graph.prune_node(candidates[pick],
                                 static_cast<PruneReason>(rng.below(3)));
                candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
            } else {
                const std::size_t pick = rng.below(candidates.size());
                graph.mark_retained(candidates[pick]);
                retained.push_back(candidates[pick]);
                candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
            }
        }
        check_invariants(graph);
    }
}

TEST_CASE("checkpoint round-trips and is byte-stable") {
    SynthesisGraph graph(test::make_catalog(4), "libx");
    const NodeId a = add_retained(graph, Origin::Initial, {ParentId::api("lib.fn0")}, "a");
    const NodeId b = add_retained(graph, Origin::Iterative,
                                  {ParentId::sample(a)}, "b");
    (void)b;
    const NodeId c = graph.add_sample(Origin::Initial, "c", "y", {ParentId::api("lib.fn2")});
    graph.prune_node(c, PruneReason::Execution);

    test::TempDir dir;
    const auto path = dir.path() / "ckpt.jsonl";
    nlohmann::json state{{"attempts", 17}};
    graph_io::save_checkpoint(graph, path, &state);

    auto loaded = graph_io::load_checkpoint(path);
    CHECK(loaded.graph.library_name() == "libx");
    CHECK(loaded.graph.sample_nodes().size() == 3);
    CHECK(loaded.graph.edges().size() == graph.edges().size());
    CHECK(loaded.graph.stats().retained_total() == 2);
    CHECK(loaded.pipeline_state["attempts"] == 17);

    CHECK(graph_io::checkpoint_to_string(loaded.graph, &state) ==
          graph_io::checkpoint_to_string(graph, &state));
}

TEST_CASE("corrupt checkpoints are rejected with diagnostics") {
    test::TempDir dir;
    const auto path = dir.path() / "ckpt.jsonl";

    SynthesisGraph graph(test::make_catalog(2), "lib");
    add_retained(graph, Origin::Initial, {ParentId::api("lib.fn0")}, "a");
    graph_io::save_checkpoint(graph, path);

    // truncate the file mid-record
    std::string text;
    {
        std::ifstream in(path);
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    {
        std::ofstream out(path, std::ios::trunc);
        out << text.substr(0, text.size() / 2);
    }
    try {
        (void)graph_io::load_checkpoint(path);
        FAIL("expected CorruptCheckpoint");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptCheckpoint);
    }

    try {
        (void)graph_io::load_checkpoint(dir.path() / "missing.jsonl");
        FAIL("expected NoCheckpoint");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoCheckpoint);
    }
}

TEST_CASE("checkpoints with edges missing for live nodes are rejected") {
    SynthesisGraph graph(test::make_catalog(2), "lib");
    add_retained(graph, Origin::Initial, {ParentId::api("lib.fn0")}, "a");

    test::TempDir dir;
    const auto path = dir.path() / "ckpt.jsonl";
    graph_io::save_checkpoint(graph, path);

    // drop the edge record while keeping the node: the retained node now
    // violates the one-edge-per-parent rule
    std::string text;
    {
        std::ifstream in(path);
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    std::string filtered;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find("\"record\":\"edge\"") != std::string::npos) continue;
        // keep the header's edge_count honest about the removal
        std::size_t pos = line.find("\"edge_count\":1");
        if (pos != std::string::npos) line.replace(pos, 14, "\"edge_count\":0");
        filtered += line + "\n";
    }
    std::ofstream(path, std::ios::trunc) << filtered;

    try {
        (void)graph_io::load_checkpoint(path);
        FAIL("expected CorruptCheckpoint");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptCheckpoint);
    }
}

TEST_CASE("fixture catalog loads") {
    auto catalog = graph_io::load_catalog(test::fixture_dir() / "catalog.jsonl");
    CHECK(catalog.size() == 16);
    SynthesisGraph graph(catalog, "arraykit");
    CHECK(graph.api_nodes().count("arraykit.where") == 1);
}
