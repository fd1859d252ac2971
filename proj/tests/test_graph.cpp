#include "hopqa/graph.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <sstream>

using namespace hopqa;

TEST_CASE("init_graph") {
    SUBCASE("two entities, all frontier, no edges") {
        CognitiveGraph g = CognitiveGraph::init({"Alpha", "Beta"});
        CHECK(g.node_count() == 2);
        CHECK(g.edge_count() == 0);
        CHECK(*g.pop_frontier() == 0);
        CHECK(*g.pop_frontier() == 1);
        CHECK_FALSE(g.pop_frontier().has_value());
    }
    SUBCASE("duplicate normalized names collapse to one node") {
        CognitiveGraph g = CognitiveGraph::init({"Alpha", "alpha", "ALPHA."});
        CHECK(g.node_count() == 1);
    }
    SUBCASE("zero entities") {
        CognitiveGraph g = CognitiveGraph::init({});
        CHECK(g.node_count() == 0);
        CHECK_FALSE(g.pop_frontier().has_value());
    }
}

TEST_CASE("add_extraction outcomes and the revisit rule") {
    CognitiveGraph g = CognitiveGraph::init({"Alpha"});
    REQUIRE(*g.pop_frontier() == 0);

    SUBCASE("fresh name creates a node and queues it") {
        CHECK(g.add_extraction(0, "Beta", NodeKind::Hop, 1, "s1", true) == AddOutcome::Created);
        CHECK(g.node_count() == 2);
        CHECK(*g.pop_frontier() == 1);
    }
    SUBCASE("existing node with a new edge re-enters the frontier exactly once") {
        g.add_extraction(0, "Beta", NodeKind::Hop, 1, "s1", true);
        REQUIRE(*g.pop_frontier() == 1);
        // New edge Beta -> Alpha: Alpha must be re-marked.
        CHECK(g.add_extraction(1, "Alpha", NodeKind::Hop, 0, "s0", true) ==
              AddOutcome::RelinkedFrontier);
        CHECK(*g.pop_frontier() == 0);
        CHECK_FALSE(g.pop_frontier().has_value());
    }
    SUBCASE("existing edge is ignored") {
        g.add_extraction(0, "Beta", NodeKind::Hop, 1, "s1", true);
        const int nodes = g.node_count();
        const int edges = g.edge_count();
        CHECK(g.add_extraction(0, "Beta", NodeKind::Hop, 1, "s1", true) == AddOutcome::Ignored);
        CHECK(g.node_count() == nodes);
        CHECK(g.edge_count() == edges);
    }
    SUBCASE("node already queued is linked without duplication") {
        g.add_extraction(0, "Beta", NodeKind::Hop, 1, "s1", true);  // Beta queued
        CHECK(g.add_extraction(0, "beta", NodeKind::Hop, 0, "s0", true) == AddOutcome::Ignored);
        // A second source gives a genuinely new edge while Beta is queued.
        g.add_node("Gamma", NodeKind::Hop, true);
        CHECK(g.add_extraction(2, "Beta", NodeKind::Hop, 0, "g0", true) == AddOutcome::Linked);
        CHECK(*g.pop_frontier() == 1);
        CHECK_FALSE(g.pop_frontier().has_value());
    }
    SUBCASE("unknown source id throws") {
        CHECK_THROWS_AS(g.add_extraction(9, "Beta", NodeKind::Hop, 0, "s", true), GraphError);
    }
    SUBCASE("self-edges are legal") {
        CHECK(g.add_extraction(0, "Alpha", NodeKind::Hop, 0, "s0", true) ==
              AddOutcome::RelinkedFrontier);
        CHECK(g.edge_count() == 1);
        CHECK(g.edges()[0].src == g.edges()[0].dst);
    }
}

TEST_CASE("collect_clues") {
    CognitiveGraph g = CognitiveGraph::init({"Alpha", "Beta"});
    g.add_extraction(0, "Target", NodeKind::Hop, 2, "alpha sentence", true);

    SUBCASE("no predecessors means empty clues") {
        CHECK(g.collect_clues(0).empty());
    }
    SUBCASE("two in-edges carrying the same sentence give one clue") {
        g.add_extraction(1, "Target", NodeKind::Hop, 5, "alpha sentence", true);
        CHECK(g.collect_clues(2).size() == 1);
    }
    SUBCASE("different predecessors give deterministic clue order") {
        g.add_extraction(1, "Target", NodeKind::Hop, 5, "beta sentence", true);
        const auto clues = g.collect_clues(2);
        REQUIRE(clues.size() == 2);
        CHECK(clues[0].title == "Alpha");
        CHECK(clues[0].sent_idx == 2);
        CHECK(clues[0].sentence == "alpha sentence");
        CHECK(clues[1].title == "Beta");
        CHECK(clues[1].sentence == "beta sentence");
    }
}

namespace {

CorpusStore mini_corpus() {
    const std::string jsonl =
        R"({"title": "Alpha Tower", "sentences": ["Dust gathers here.", "It was built by Beta Corp."]})"
        "\n"
        R"({"title": "Beta Corp", "sentences": ["The firm was led by Carol Hale."]})"
        "\n";
    std::istringstream in(jsonl);
    return CorpusStore::ingest(in);
}

QuestionRecord mini_record() {
    QuestionRecord rec;
    rec.id = "r0";
    rec.question = "Who led the firm that built Alpha Tower?";
    rec.answer = "Carol Hale";
    rec.supporting_facts = {{"Alpha Tower", 1}, {"Beta Corp", 0}};
    return rec;
}

}  // namespace

TEST_CASE("build_gold_graph wires entities and the answer by fuzzy matching") {
    const CorpusStore corpus = mini_corpus();
    const GoldBuild gold = build_gold_graph(mini_record(), corpus, 0.8);
    const CognitiveGraph& g = gold.graph;

    REQUIRE(g.node_count() == 3);
    const int a = g.find("Alpha Tower");
    const int b = g.find("Beta Corp");
    const int ans = g.find("Carol Hale");
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    REQUIRE(ans >= 0);
    CHECK(g.node(ans).kind == NodeKind::Answer);
    CHECK(g.answer_node() == ans);
    CHECK(g.has_edge(a, b));
    CHECK(g.has_edge(b, ans));
    CHECK_FALSE(g.has_edge(a, ans));
    CHECK(gold.answer_grounded);

    // Span supervision: one answer span in Beta Corp's paragraph, one hop
    // span in Alpha Tower's.
    REQUIRE(gold.paragraphs.size() == 2);
    CHECK(gold.paragraphs[0].title == "Alpha Tower");
    REQUIRE(gold.paragraphs[0].hop_spans.size() == 1);
    CHECK(gold.paragraphs[0].hop_spans[0].text == "Beta Corp");
    CHECK_FALSE(gold.paragraphs[0].answer_span.has_value());
    REQUIRE(gold.paragraphs[1].answer_span.has_value());
    CHECK(gold.paragraphs[1].answer_span->text == "Carol Hale");
}

TEST_CASE("build_gold_graph: unmatched sentences add no edges") {
    const CorpusStore corpus = mini_corpus();
    QuestionRecord rec = mini_record();
    rec.supporting_facts = {{"Alpha Tower", 0}};  // the dust sentence
    const GoldBuild gold = build_gold_graph(rec, corpus, 0.8);
    CHECK(gold.graph.edge_count() == 0);
    CHECK_FALSE(gold.answer_grounded);
}

TEST_CASE("build_gold_graph: unresolvable supporting-fact title is an error") {
    const CorpusStore corpus = mini_corpus();
    QuestionRecord rec = mini_record();
    rec.supporting_facts.push_back({"Missing Doc", 0});
    CHECK_THROWS_WITH_AS(build_gold_graph(rec, corpus, 0.8), doctest::Contains("Missing Doc"),
                         GraphError);
}

TEST_CASE("build_gold_graph resolves paragraphs from the record context too") {
    const CorpusStore empty = [] {
        std::istringstream in("");
        return CorpusStore::ingest(in);
    }();
    QuestionRecord rec = mini_record();
    rec.context = {{"Alpha Tower", {"Dust gathers here.", "It was built by Beta Corp."}},
                   {"Beta Corp", {"The firm was led by Carol Hale."}}};
    const GoldBuild gold = build_gold_graph(rec, empty, 0.8);
    CHECK(gold.graph.edge_count() == 2);
}

TEST_CASE("graph JSON round-trip preserves structure") {
    const CorpusStore corpus = mini_corpus();
    GoldBuild gold = build_gold_graph(mini_record(), corpus, 0.8);
    gold.graph.node(0).sem = Vector::LinSpaced(4, 0.0, 3.0);

    const nlohmann::json j = gold.graph.to_json();
    const CognitiveGraph back = CognitiveGraph::from_json(j);
    REQUIRE(back.node_count() == gold.graph.node_count());
    REQUIRE(back.edge_count() == gold.graph.edge_count());
    for (int i = 0; i < back.node_count(); ++i) {
        CHECK(back.node(i).name == gold.graph.node(i).name);
        CHECK(back.node(i).kind == gold.graph.node(i).kind);
    }
    for (int e = 0; e < back.edge_count(); ++e) {
        CHECK(back.edges()[e].src == gold.graph.edges()[e].src);
        CHECK(back.edges()[e].dst == gold.graph.edges()[e].dst);
        CHECK(back.edges()[e].sentence == gold.graph.edges()[e].sentence);
    }
    CHECK(back.answer_node() == gold.graph.answer_node());
    REQUIRE(back.node(0).sem.has_value());
    CHECK(back.node(0).sem->isApprox(*gold.graph.node(0).sem));
    // Identical re-export.
    CHECK(back.to_json() == j);
}

TEST_CASE("DOT export renders answer nodes as circles and hop nodes as boxes") {
    const CorpusStore corpus = mini_corpus();
    const GoldBuild gold = build_gold_graph(mini_record(), corpus, 0.8);
    const std::string dot = gold.graph.to_dot();
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("shape=box") != std::string::npos);
    CHECK(dot.find("shape=circle") != std::string::npos);
    CHECK(dot.find("->") != std::string::npos);
}
