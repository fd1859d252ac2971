#include "hopqa/engine.hpp"

#include "hopqa/reasoner.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

namespace hopqa {

namespace {

Matrix with_rows(const Matrix& x, int rows) {
    if (x.rows() == rows) return x;
    Matrix out = Matrix::Zero(rows, x.cols());
    out.topRows(x.rows()) = x;
    return out;
}

}  // namespace

ExpansionOutcome run_expansion(const std::string& question, const CorpusStore& corpus,
                               const Extractor& extractor, const ReasonerParams& reasoner,
                               const EngineConfig& config) {
    ExpansionOutcome out;

    // Initialization: entities mentioned in the question, kept only when they
    // resolve in the corpus.
    ExtractionInput init_input;
    init_input.question = question;
    init_input.mode = ExtractMode::InitQuestionOnly;
    const ExtractionResult init = extractor.extract(init_input);

    const TokenizedText question_toks = tokenize(question);
    std::vector<std::string> entities;
    std::vector<std::size_t> offsets;
    for (const Span& span : init.hop_spans) {
        const WikiDoc* doc = corpus.lookup(span.text);
        if (!doc) {
            ++out.diag.dropped_hop_spans;
            continue;
        }
        if (std::find(entities.begin(), entities.end(), doc->title) != entities.end()) continue;
        entities.push_back(doc->title);
        offsets.push_back(span.start < static_cast<int>(question_toks.tokens.size())
                              ? question_toks.tokens[static_cast<std::size_t>(span.start)].begin
                              : 0);
    }
    // First-mention order decides comparison operands later.
    std::vector<std::size_t> order(entities.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return offsets[a] < offsets[b]; });
    std::vector<std::string> ordered;
    for (std::size_t i : order) ordered.push_back(entities[i]);

    if (ordered.empty()) {
        throw EngineError(EngineError::Code::NoQuestionEntities,
                          "no corpus entity mentioned in the question");
    }
    out.graph = CognitiveGraph::init(ordered);
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.initial_entities.emplace_back(static_cast<int>(i), offsets[order[i]]);
    }

    CognitiveGraph& g = out.graph;
    const bool async = config.update_mode == EngineConfig::UpdateMode::Asynchronous;
    Matrix x = Matrix::Zero(g.node_count(), config.H);

    while (!g.frontier_empty() && out.diag.visits < config.max_visits &&
           g.node_count() < config.max_nodes) {
        const int xid = *g.pop_frontier();
        ++out.diag.visits;
        ++out.diag.visit_counts[xid];
        // Node references go stale when add_extraction grows the graph, so
        // everything needed later is copied out here.
        const NodeKind kind = g.node(xid).kind;
        const bool has_paragraph = g.node(xid).has_paragraph;
        const std::string name = g.node(xid).name;

        ExtractionInput input;
        input.question = question;
        input.mode = ExtractMode::Visit;
        for (const auto& clue : g.collect_clues(xid)) input.clues.push_back(clue.sentence);
        const bool hop_node = kind == NodeKind::Hop || kind == NodeKind::NegativeHop;
        const WikiDoc* doc = nullptr;
        if (hop_node && has_paragraph) {
            doc = corpus.lookup(name);
            if (doc) input.paragraph = doc->sentences;
        }

        const ExtractionResult res = extractor.extract(input);
        if (res.sem) g.node(xid).sem = *res.sem;

        if (doc) {
            const ParagraphIndex para = index_paragraph(doc->sentences);
            for (const Span& span : res.hop_spans) {
                const WikiDoc* target = corpus.lookup(span.text);
                if (!target) {
                    ++out.diag.dropped_hop_spans;
                    continue;
                }
                if (g.node_count() >= config.max_nodes && g.find(target->title) < 0) continue;
                const int si = para.sentence_of(span.start);
                g.add_extraction(xid, target->title, NodeKind::Hop, si,
                                 doc->sentences[static_cast<std::size_t>(si)],
                                 /*has_paragraph=*/true);
            }
            for (const Span& span : res.ans_spans) {
                if (g.node_count() >= config.max_nodes && g.find(span.text) < 0) continue;
                const int si = para.sentence_of(span.start);
                g.add_extraction(xid, span.text, NodeKind::Answer, si,
                                 doc->sentences[static_cast<std::size_t>(si)]);
            }
        }

        if (async) {
            x = with_rows(x, g.node_count());
            if (g.node(xid).sem) x.row(xid) = g.node(xid).sem->transpose();
            const Matrix adinv = normalize_adjacency(g);
            const Vector alpha = Vector::Ones(g.node_count());
            x.row(xid) = propagate_row(x, adinv, reasoner, alpha, xid).transpose();
            g.node(xid).hidden = x.row(xid).transpose();
        }
        out.diag.growth.emplace_back(g.node_count(), g.edge_count());
    }

    out.X = with_rows(x, g.node_count());
    if (!async) {
        for (const Node& n : g.nodes()) {
            if (n.sem) out.X.row(n.id) = n.sem->transpose();
        }
    }
    return out;
}

QAResult answer_question(const std::string& question, const CorpusStore& corpus,
                         const Extractor& extractor, const Checkpoint& ckpt,
                         const EngineConfig& config, bool want_relevance) {
    ExpansionOutcome exp = run_expansion(question, corpus, extractor, ckpt.reasoner, config);
    QAResult result;
    result.diag = exp.diag;

    CognitiveGraph& g = exp.graph;
    Matrix X;
    if (config.update_mode == EngineConfig::UpdateMode::BatchFinal) {
        HiddenState hs = run_reasoner(g, ckpt.reasoner, config.gnn_steps);
        X = std::move(hs.X);
        for (int i = 0; i < g.node_count(); ++i) g.node(i).hidden = X.row(i).transpose();
    } else {
        X = std::move(exp.X);
    }

    result.question_type = classify_question(question);
    QuestionType routed = result.question_type;
    if (routed != QuestionType::Special && exp.initial_entities.size() < 2) {
        // Never crash the batch evaluator: fall back to answer-node selection.
        routed = QuestionType::Special;
        result.diag.comparison_fallback = true;
    }

    int target_node = -1;
    double target_sign = 1.0;  // BCE direction for relevance on comparisons
    if (routed == QuestionType::Special) {
        const SpecialSelection sel = [&] {
            try {
                return select_answer_special(g, X, ckpt.predictor.special);
            } catch (const PredictorError& e) {
                throw EngineError(EngineError::Code::NoAnswerCandidates, e.what());
            }
        }();
        result.answer_node = sel.node;
        result.answer = g.node(sel.node).name;
        result.answer_probabilities = sel.probs;
        target_node = sel.node;
    } else {
        const int x = exp.initial_entities[0].first;
        const int y = exp.initial_entities[1].first;
        const HeadParams& head = routed == QuestionType::Alternative ? ckpt.predictor.alternative
                                                                     : ckpt.predictor.general;
        const double p = sigmoid(comparison_logit(X, x, y, head));
        const bool positive = p >= 0.5;
        result.answer_node = positive ? x : y;
        if (routed == QuestionType::Alternative) {
            result.answer = g.node(result.answer_node).name;
        } else {
            result.answer = positive ? "yes" : "no";
        }
        result.answer_probabilities = {{x, p}, {y, 1.0 - p}};
        target_node = x;
        target_sign = positive ? 1.0 : -1.0;
    }

    // Supporting facts: the union of clue provenance over all nodes.
    std::set<std::pair<std::string, int>> facts;
    for (const Edge& e : g.edges()) {
        facts.insert({g.node(e.src).name, e.sent_idx});
    }
    result.supporting_facts.assign(facts.begin(), facts.end());

    if (want_relevance) {
        const QuestionType routed_copy = routed;
        const Checkpoint& c = ckpt;
        const int cx = routed == QuestionType::Special ? -1 : exp.initial_entities[0].first;
        const int cy = routed == QuestionType::Special ? -1 : exp.initial_entities[1].first;
        auto loss_grad = [&, target_node, target_sign](const Matrix& xf) {
            Matrix dx = Matrix::Zero(xf.rows(), xf.cols());
            if (routed_copy == QuestionType::Special) {
                // Binary NLL of the predicted node's logit, -log sigmoid(F):
                // stays informative even with a single answer candidate.
                const Vector row = xf.row(target_node).transpose();
                const double z = head_forward(c.predictor.special, row);
                const HeadGrads hg =
                    head_backward(c.predictor.special, row, sigmoid(z) - 1.0);
                dx.row(target_node) += hg.dv.transpose();
            } else {
                const HeadParams& head = routed_copy == QuestionType::Alternative
                                             ? c.predictor.alternative
                                             : c.predictor.general;
                const Vector diff = (xf.row(cx) - xf.row(cy)).transpose();
                const double p = sigmoid(head_forward(head, diff));
                const double t = target_sign > 0 ? 1.0 : 0.0;
                const HeadGrads hg = head_backward(head, diff, p - t);
                dx.row(cx) += hg.dv.transpose();
                dx.row(cy) -= hg.dv.transpose();
            }
            return dx;
        };
        result.relevance = node_relevance(g, ckpt.reasoner, config.gnn_steps, loss_grad);
    }

    result.graph = std::move(g);
    return result;
}

std::vector<BatchItem> answer_batch(const std::vector<std::string>& questions,
                                    const CorpusStore& corpus, const Extractor& extractor,
                                    const Checkpoint& ckpt, const EngineConfig& config,
                                    int jobs) {
    std::vector<BatchItem> items(questions.size());
    if (questions.empty()) return items;
    jobs = std::max(1, jobs);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= questions.size()) return;
            try {
                items[i].result = answer_question(questions[i], corpus, extractor, ckpt, config);
            } catch (const EngineError& e) {
                items[i].error = e.what();
                items[i].error_code = std::string(e.code_string());
            } catch (const std::exception& e) {
                items[i].error = e.what();
                items[i].error_code = "error";
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return items;
}

}  // namespace hopqa
