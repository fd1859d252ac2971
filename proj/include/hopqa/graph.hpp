#pragma once
// The cognitive graph: hop/answer nodes, provenance-carrying edges, the FIFO
// frontier with the revisit rule, clue collection, and the gold-graph builder
// used to construct training supervision.

#include "hopqa/corpus.hpp"
#include "hopqa/dataset.hpp"
#include "hopqa/math.hpp"

#include <nlohmann/json_fwd.hpp>

#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hopqa {

enum class NodeKind { Hop, Answer, NegativeHop, NegativeAnswer };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view s);

struct Node {
    int id = -1;
    std::string name;  // entity title or raw answer text
    NodeKind kind = NodeKind::Hop;
    std::optional<Vector> sem;     // semantic vector from System 1
    std::optional<Vector> hidden;  // X[x] after reasoning
    bool has_paragraph = false;
};

struct Edge {
    int src = -1;
    int dst = -1;
    int sent_idx = -1;      // sentence index in para[src] the target came from
    std::string sentence;   // that raw sentence
};

// Outcome of add_extraction:
//   Created           new node + edge, node queued
//   RelinkedFrontier  existing node, new edge, node re-entered the frontier
//   Linked            existing node, new edge, node was already queued
//   Ignored           edge already present, graph unchanged
enum class AddOutcome { Created, Linked, RelinkedFrontier, Ignored };

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CognitiveGraph {
public:
    // One Hop node per entity, deduplicated by normalized name, all marked
    // frontier. Names are expected in first-mention order.
    static CognitiveGraph init(const std::vector<std::string>& question_entities);

    AddOutcome add_extraction(int src, std::string_view name, NodeKind kind, int sent_idx,
                              std::string_view sentence, bool has_paragraph = false);

    // Node creation without an edge (initial entities, negative nodes,
    // ungrounded gold answers). Does not touch the frontier.
    int add_node(std::string_view name, NodeKind kind, bool has_paragraph = false);

    void mark_frontier(int id);
    std::optional<int> pop_frontier();
    bool frontier_empty() const { return frontier_.empty(); }

    struct Clue {
        std::string title;  // predecessor node name
        int sent_idx;
        std::string sentence;
    };
    // Provenance sentences of all in-edges of x, ordered by (predecessor id,
    // sentence index), deduplicated by sentence text.
    std::vector<Clue> collect_clues(int x) const;

    int find(std::string_view name) const;  // -1 when absent
    bool has_edge(int src, int dst) const;

    Node& node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }
    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& in_edges(int id) const { return in_.at(static_cast<std::size_t>(id)); }
    const std::vector<int>& out_edges(int id) const { return out_.at(static_cast<std::size_t>(id)); }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    int answer_node() const { return answer_node_; }
    void set_answer_node(int id) { answer_node_ = id; }

    nlohmann::json to_json() const;
    static CognitiveGraph from_json(const nlohmann::json& j);
    // Answer nodes render as circles, hop nodes as boxes. Pass per-node
    // relevance scores to annotate labels.
    std::string to_dot(const Vector* relevance = nullptr) const;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> out_, in_;  // edge indexes per node
    std::deque<int> frontier_;
    std::unordered_set<int> in_frontier_;
    std::unordered_map<std::string, int> by_name_;  // normalized name -> id
    int answer_node_ = -1;
};

// One matched span inside a paragraph, in paragraph-level token coordinates.
struct GoldSpan {
    std::string text;
    int start = 0;
    int end = 0;  // inclusive
    double similarity = 0.0;
};

// Span supervision for one gold or negative paragraph (the D[x,Q] data).
struct ParagraphSpans {
    std::string title;
    std::vector<std::string> sentences;
    std::vector<GoldSpan> hop_spans;
    std::optional<GoldSpan> answer_span;  // at most one per paragraph
    bool is_negative = false;
};

struct GoldBuild {
    CognitiveGraph graph;
    std::vector<ParagraphSpans> paragraphs;  // gold paragraphs, record order
    bool answer_grounded = true;  // false when no fact sentence matched the answer
};

// Builds the gold-only graph of a record: for each supporting-fact sentence in
// para[x] and each y in gold entities + answer, a fuzzy match at theta adds
// edge (x, y) with that sentence as provenance. The answer becomes an Answer
// node (skipped for yes/no answers). Throws GraphError when a supporting-fact
// title resolves neither in the record context nor the corpus.
GoldBuild build_gold_graph(const QuestionRecord& record, const CorpusStore& corpus, double theta);

}  // namespace hopqa
