#include "hopqa/graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace hopqa {

using nlohmann::json;

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Hop: return "hop";
        case NodeKind::Answer: return "answer";
        case NodeKind::NegativeHop: return "negative_hop";
        case NodeKind::NegativeAnswer: return "negative_answer";
    }
    return "hop";
}

NodeKind node_kind_from_string(std::string_view s) {
    if (s == "hop") return NodeKind::Hop;
    if (s == "answer") return NodeKind::Answer;
    if (s == "negative_hop") return NodeKind::NegativeHop;
    if (s == "negative_answer") return NodeKind::NegativeAnswer;
    throw GraphError("unknown node kind \"" + std::string(s) + "\"");
}

CognitiveGraph CognitiveGraph::init(const std::vector<std::string>& question_entities) {
    CognitiveGraph g;
    for (const auto& name : question_entities) {
        if (g.find(name) >= 0) continue;
        const int id = g.add_node(name, NodeKind::Hop, /*has_paragraph=*/true);
        g.mark_frontier(id);
    }
    return g;
}

int CognitiveGraph::add_node(std::string_view name, NodeKind kind, bool has_paragraph) {
    const int id = static_cast<int>(nodes_.size());
    Node n;
    n.id = id;
    n.name.assign(name);
    n.kind = kind;
    n.has_paragraph = has_paragraph;
    nodes_.push_back(std::move(n));
    out_.emplace_back();
    in_.emplace_back();
    by_name_.emplace(normalize_title(name), id);
    return id;
}

void CognitiveGraph::mark_frontier(int id) {
    if (id < 0 || id >= node_count()) throw GraphError("mark_frontier: unknown node id");
    if (in_frontier_.insert(id).second) frontier_.push_back(id);
}

std::optional<int> CognitiveGraph::pop_frontier() {
    if (frontier_.empty()) return std::nullopt;
    const int id = frontier_.front();
    frontier_.pop_front();
    in_frontier_.erase(id);
    return id;
}

int CognitiveGraph::find(std::string_view name) const {
    auto it = by_name_.find(normalize_title(name));
    return it == by_name_.end() ? -1 : it->second;
}

bool CognitiveGraph::has_edge(int src, int dst) const {
    for (int ei : out_.at(static_cast<std::size_t>(src))) {
        if (edges_[static_cast<std::size_t>(ei)].dst == dst) return true;
    }
    return false;
}

AddOutcome CognitiveGraph::add_extraction(int src, std::string_view name, NodeKind kind,
                                          int sent_idx, std::string_view sentence,
                                          bool has_paragraph) {
    if (src < 0 || src >= node_count()) throw GraphError("add_extraction: unknown src id");
    int dst = find(name);
    const bool created = dst < 0;
    if (created) {
        dst = add_node(name, kind, has_paragraph);
    } else if (has_edge(src, dst)) {
        return AddOutcome::Ignored;
    }
    Edge e;
    e.src = src;
    e.dst = dst;
    e.sent_idx = sent_idx;
    e.sentence.assign(sentence);
    const int ei = static_cast<int>(edges_.size());
    edges_.push_back(std::move(e));
    out_[static_cast<std::size_t>(src)].push_back(ei);
    in_[static_cast<std::size_t>(dst)].push_back(ei);

    if (created) {
        mark_frontier(dst);
        return AddOutcome::Created;
    }
    // Revisit rule: a new in-edge means new clues, so the node goes back to
    // the frontier unless it is already queued.
    const bool queued = in_frontier_.count(dst) > 0;
    mark_frontier(dst);
    return queued ? AddOutcome::Linked : AddOutcome::RelinkedFrontier;
}

std::vector<CognitiveGraph::Clue> CognitiveGraph::collect_clues(int x) const {
    if (x < 0 || x >= node_count()) throw GraphError("collect_clues: unknown node id");
    std::vector<const Edge*> incoming;
    for (int ei : in_[static_cast<std::size_t>(x)]) incoming.push_back(&edges_[static_cast<std::size_t>(ei)]);
    std::sort(incoming.begin(), incoming.end(), [](const Edge* a, const Edge* b) {
        if (a->src != b->src) return a->src < b->src;
        return a->sent_idx < b->sent_idx;
    });
    std::vector<Clue> clues;
    std::unordered_set<std::string> seen;
    for (const Edge* e : incoming) {
        if (!seen.insert(e->sentence).second) continue;
        clues.push_back({nodes_[static_cast<std::size_t>(e->src)].name, e->sent_idx, e->sentence});
    }
    return clues;
}

json CognitiveGraph::to_json() const {
    json j;
    j["nodes"] = json::array();
    for (const Node& n : nodes_) {
        json jn;
        jn["id"] = n.id;
        jn["name"] = n.name;
        jn["kind"] = std::string(to_string(n.kind));
        jn["has_paragraph"] = n.has_paragraph;
        if (n.sem) jn["sem"] = std::vector<double>(n.sem->begin(), n.sem->end());
        if (n.hidden) jn["hidden"] = std::vector<double>(n.hidden->begin(), n.hidden->end());
        j["nodes"].push_back(std::move(jn));
    }
    j["edges"] = json::array();
    for (const Edge& e : edges_) {
        j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"sent_idx", e.sent_idx},
                              {"sentence", e.sentence}});
    }
    if (answer_node_ >= 0) j["answer"] = answer_node_;
    return j;
}

CognitiveGraph CognitiveGraph::from_json(const json& j) {
    CognitiveGraph g;
    for (const auto& jn : j.at("nodes")) {
        const int id = g.add_node(jn.at("name").get<std::string>(),
                                  node_kind_from_string(jn.at("kind").get<std::string>()),
                                  jn.value("has_paragraph", false));
        if (id != jn.at("id").get<int>()) throw GraphError("from_json: node ids must be dense");
        if (jn.contains("sem")) {
            const auto v = jn["sem"].get<std::vector<double>>();
            g.nodes_[static_cast<std::size_t>(id)].sem =
                Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        if (jn.contains("hidden")) {
            const auto v = jn["hidden"].get<std::vector<double>>();
            g.nodes_[static_cast<std::size_t>(id)].hidden =
                Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
    }
    for (const auto& je : j.at("edges")) {
        Edge e;
        e.src = je.at("src").get<int>();
        e.dst = je.at("dst").get<int>();
        e.sent_idx = je.at("sent_idx").get<int>();
        e.sentence = je.at("sentence").get<std::string>();
        if (e.src < 0 || e.src >= g.node_count() || e.dst < 0 || e.dst >= g.node_count()) {
            throw GraphError("from_json: edge endpoint out of range");
        }
        const int ei = static_cast<int>(g.edges_.size());
        g.edges_.push_back(e);
        g.out_[static_cast<std::size_t>(e.src)].push_back(ei);
        g.in_[static_cast<std::size_t>(e.dst)].push_back(ei);
    }
    if (j.contains("answer")) g.answer_node_ = j["answer"].get<int>();
    return g;
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string CognitiveGraph::to_dot(const Vector* relevance) const {
    std::ostringstream os;
    os << "digraph cognitive_graph {\n  rankdir=LR;\n";
    for (const Node& n : nodes_) {
        const bool is_answer = n.kind == NodeKind::Answer || n.kind == NodeKind::NegativeAnswer;
        std::string label = n.name;
        if (relevance && n.id < relevance->size()) {
            std::ostringstream rl;
            rl.precision(4);
            rl << label << "\\nR=" << (*relevance)(n.id);
            label = rl.str();
        }
        os << "  n" << n.id << " [label=\"" << dot_escape(label) << "\" shape="
           << (is_answer ? "circle" : "box");
        if (n.id == answer_node_) os << " penwidth=2";
        os << "];\n";
    }
    for (const Edge& e : edges_) {
        os << "  n" << e.src << " -> n" << e.dst << " [label=\"s" << e.sent_idx << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

namespace {

const std::vector<std::string>* resolve_paragraph(const QuestionRecord& record,
                                                  const CorpusStore& corpus,
                                                  const std::string& title) {
    for (const auto& [ctx_title, sents] : record.context) {
        if (ctx_title == title || normalize_title(ctx_title) == normalize_title(title)) {
            return &sents;
        }
    }
    if (const WikiDoc* doc = corpus.lookup(title)) return &doc->sentences;
    return nullptr;
}

bool is_yes_no(const std::string& answer) {
    const std::string n = normalize_answer(answer);
    return n == "yes" || n == "no";
}

}  // namespace

GoldBuild build_gold_graph(const QuestionRecord& record, const CorpusStore& corpus,
                           double theta) {
    GoldBuild out;
    CognitiveGraph& g = out.graph;

    // Gold entities are the supporting-fact titles, in first-appearance order.
    std::vector<std::string> entities;
    for (const auto& [title, idx] : record.supporting_facts) {
        (void)idx;
        if (std::find(entities.begin(), entities.end(), title) == entities.end()) {
            entities.push_back(title);
        }
    }
    std::vector<const std::vector<std::string>*> paragraphs;
    for (const auto& title : entities) {
        const auto* para = resolve_paragraph(record, corpus, title);
        if (!para) {
            throw GraphError("unresolvable supporting-fact title \"" + title + "\" in record " +
                             record.id);
        }
        paragraphs.push_back(para);
        g.add_node(title, NodeKind::Hop, /*has_paragraph=*/true);
    }

    // The answer node. Yes/no answers are judgments, not spans, and get no
    // node. An answer matching an entity name merges into that node.
    const bool want_answer_node = !record.answer.empty() && !is_yes_no(record.answer);
    int answer_id = -1;
    if (want_answer_node) {
        answer_id = g.find(record.answer);
        if (answer_id < 0) answer_id = g.add_node(record.answer, NodeKind::Answer);
        g.node(answer_id).kind = NodeKind::Answer;
        g.set_answer_node(answer_id);
    }

    // Facts grouped per entity, in sentence order.
    bool answer_matched_anywhere = false;
    for (std::size_t xi = 0; xi < entities.size(); ++xi) {
        const std::string& title = entities[xi];
        const auto& sentences = *paragraphs[xi];
        const int x = g.find(title);

        std::vector<int> fact_idxs;
        for (const auto& [t, idx] : record.supporting_facts) {
            if (t == title) fact_idxs.push_back(idx);
        }
        std::sort(fact_idxs.begin(), fact_idxs.end());
        fact_idxs.erase(std::unique(fact_idxs.begin(), fact_idxs.end()), fact_idxs.end());

        // Paragraph-level token offsets per sentence.
        std::vector<int> offsets(sentences.size() + 1, 0);
        std::vector<TokenizedText> sent_toks(sentences.size());
        for (std::size_t si = 0; si < sentences.size(); ++si) {
            sent_toks[si] = tokenize(sentences[si]);
            offsets[si + 1] = offsets[si] + static_cast<int>(sent_toks[si].tokens.size());
        }

        ParagraphSpans para_spans;
        para_spans.title = title;
        para_spans.sentences = sentences;

        std::optional<GoldSpan> best_answer;
        int best_answer_sent = -1;
        for (int idx : fact_idxs) {
            if (idx < 0 || idx >= static_cast<int>(sentences.size())) {
                throw GraphError("supporting-fact sentence index " + std::to_string(idx) +
                                 " out of range for \"" + title + "\" in record " + record.id);
            }
            const TokenizedText& st = sent_toks[static_cast<std::size_t>(idx)];

            if (want_answer_node) {
                if (auto m = fuzzy_match_span(st, record.answer, theta)) {
                    GoldSpan span{m->matched_text,
                                  offsets[static_cast<std::size_t>(idx)] + static_cast<int>(m->token_begin),
                                  offsets[static_cast<std::size_t>(idx)] + static_cast<int>(m->token_end),
                                  m->similarity};
                    if (!best_answer || span.similarity > best_answer->similarity) {
                        best_answer = span;
                        best_answer_sent = idx;
                    }
                    g.add_extraction(x, record.answer, NodeKind::Answer, idx, st.raw);
                    answer_matched_anywhere = true;
                }
            }
            for (const auto& y : entities) {
                if (auto m = fuzzy_match_span(st, y, theta)) {
                    GoldSpan span{m->matched_text,
                                  offsets[static_cast<std::size_t>(idx)] + static_cast<int>(m->token_begin),
                                  offsets[static_cast<std::size_t>(idx)] + static_cast<int>(m->token_end),
                                  m->similarity};
                    const bool dup = std::any_of(
                        para_spans.hop_spans.begin(), para_spans.hop_spans.end(),
                        [&](const GoldSpan& s) { return s.start == span.start && s.end == span.end; });
                    if (!dup) para_spans.hop_spans.push_back(span);
                    g.add_extraction(x, y, NodeKind::Hop, idx, st.raw, /*has_paragraph=*/true);
                }
            }
        }
        (void)best_answer_sent;
        if (best_answer) {
            // The answer span wins any hop span at the same position.
            std::erase_if(para_spans.hop_spans, [&](const GoldSpan& s) {
                return s.start == best_answer->start && s.end == best_answer->end;
            });
            para_spans.answer_span = best_answer;
        }
        out.paragraphs.push_back(std::move(para_spans));
    }
    out.answer_grounded = !want_answer_node || answer_matched_anywhere;
    return out;
}

}  // namespace hopqa
