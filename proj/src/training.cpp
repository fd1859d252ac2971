#include "hopqa/training.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace hopqa {

using nlohmann::json;

namespace {

constexpr double kProbFloor = 1e-12;

const std::vector<std::string>* paragraph_of(const QuestionRecord& record,
                                             const CorpusStore& corpus,
                                             const std::string& title) {
    for (const auto& [t, sents] : record.context) {
        if (t == title || normalize_title(t) == normalize_title(title)) return &sents;
    }
    if (const WikiDoc* doc = corpus.lookup(title)) return &doc->sentences;
    return nullptr;
}

std::vector<std::string> paragraph_tokens(const std::vector<std::string>& sentences) {
    std::vector<std::string> tokens;
    for (const auto& s : sentences) {
        for (const Token& t : tokenize(s).tokens) tokens.push_back(t.text);
    }
    return tokens;
}

Vector threshold_one_hot(Eigen::Index len) {
    Vector v = Vector::Zero(len);
    v(0) = 1.0;
    return v;
}

}  // namespace

std::vector<SpanSupervision> build_span_supervision(const QuestionRecord& record,
                                                    const CorpusStore& corpus, double theta) {
    const GoldBuild gold = build_gold_graph(record, corpus, theta);
    std::vector<SpanSupervision> out;

    for (const ParagraphSpans& para : gold.paragraphs) {
        SpanSupervision sup;
        sup.question = record.question;
        sup.title = para.title;
        sup.tokens = paragraph_tokens(para.sentences);
        const auto len = static_cast<Eigen::Index>(sup.tokens.size()) + 1;

        if (para.answer_span) {
            if (para.answer_span->end + 1 >= len) {
                throw TrainingError("answer span outside paragraph in record " + record.id);
            }
            sup.gt_ans_start = Vector::Zero(len);
            sup.gt_ans_end = Vector::Zero(len);
            sup.gt_ans_start(para.answer_span->start + 1) = 1.0;
            sup.gt_ans_end(para.answer_span->end + 1) = 1.0;
        } else {
            // No answer here: the threshold slot is the target.
            sup.gt_ans_start = threshold_one_hot(len);
            sup.gt_ans_end = threshold_one_hot(len);
        }

        if (!para.hop_spans.empty()) {
            sup.gt_hop_start = Vector::Zero(len);
            sup.gt_hop_end = Vector::Zero(len);
            const double frac = 1.0 / static_cast<double>(para.hop_spans.size());
            for (const GoldSpan& s : para.hop_spans) {
                if (s.end + 1 >= len) {
                    throw TrainingError("hop span outside paragraph in record " + record.id);
                }
                sup.gt_hop_start(s.start + 1) += frac;
                sup.gt_hop_end(s.end + 1) += frac;
            }
        } else {
            sup.gt_hop_start = threshold_one_hot(len);
            sup.gt_hop_end = threshold_one_hot(len);
        }
        out.push_back(std::move(sup));
    }

    // Negative paragraphs: everything points at the threshold slot.
    std::unordered_set<std::string> gold_titles;
    for (const auto& [title, idx] : record.supporting_facts) {
        (void)idx;
        gold_titles.insert(normalize_title(title));
    }
    for (const auto& [title, sentences] : record.context) {
        if (gold_titles.count(normalize_title(title))) continue;
        SpanSupervision sup;
        sup.question = record.question;
        sup.title = title;
        sup.tokens = paragraph_tokens(sentences);
        const auto len = static_cast<Eigen::Index>(sup.tokens.size()) + 1;
        sup.gt_ans_start = threshold_one_hot(len);
        sup.gt_ans_end = threshold_one_hot(len);
        sup.gt_hop_start = threshold_one_hot(len);
        sup.gt_hop_end = threshold_one_hot(len);
        sup.is_negative = true;
        out.push_back(std::move(sup));
    }
    return out;
}

namespace {

double cross_entropy(const Vector& gt, const Vector& p) {
    if (gt.size() != p.size()) throw TrainingError("supervision/prediction length mismatch");
    double loss = 0.0;
    for (Eigen::Index i = 0; i < gt.size(); ++i) {
        if (gt(i) > 0.0) loss -= gt(i) * std::log(std::max(p(i), kProbFloor));
    }
    return loss;
}

}  // namespace

double span_loss(const SpanScores& hop, const SpanScores& ans, const SpanSupervision& gt) {
    return cross_entropy(gt.gt_ans_start, ans.start_probs) +
           cross_entropy(gt.gt_ans_end, ans.end_probs) +
           cross_entropy(gt.gt_hop_start, hop.start_probs) +
           cross_entropy(gt.gt_hop_end, hop.end_probs);
}

json TrainingSample::to_json() const {
    json j;
    j["qid"] = qid;
    j["question"] = question;
    j["type"] = std::string(to_string(type));
    j["graph"] = graph.to_json();
    j["gold_answer_node"] = gold_answer_node;
    j["cmp_x"] = cmp_x;
    j["cmp_y"] = cmp_y;
    j["cmp_label"] = cmp_label;
    j["answer_grounded"] = answer_grounded;
    return j;
}

TrainingSample TrainingSample::from_json(const json& j) {
    TrainingSample s;
    s.qid = j.at("qid").get<std::string>();
    s.question = j.at("question").get<std::string>();
    const std::string type = j.at("type").get<std::string>();
    s.type = type == "alternative" ? QuestionType::Alternative
             : type == "general"   ? QuestionType::General
                                   : QuestionType::Special;
    s.graph = CognitiveGraph::from_json(j.at("graph"));
    s.gold_answer_node = j.at("gold_answer_node").get<int>();
    s.cmp_x = j.at("cmp_x").get<int>();
    s.cmp_y = j.at("cmp_y").get<int>();
    s.cmp_label = j.at("cmp_label").get<bool>();
    s.answer_grounded = j.value("answer_grounded", true);
    return s;
}

TrainingSample build_task2_sample(const QuestionRecord& record, const CorpusStore& corpus,
                                  const Extractor& extractor, const ExtractorConfig& config,
                                  double theta, std::uint64_t seed) {
    GoldBuild gold = build_gold_graph(record, corpus, theta);
    TrainingSample sample;
    sample.qid = record.id;
    sample.question = record.question;
    sample.type = classify_question(record.question, record.answer);
    sample.answer_grounded = gold.answer_grounded;
    CognitiveGraph& g = gold.graph;
    const int entity_count = static_cast<int>(gold.paragraphs.size());

    // The attachment point for negative hop nodes: the entity mentioned
    // earliest in the question, falling back to the first entity node.
    const TokenizedText question_toks = tokenize(record.question);
    int attach = 0;
    std::size_t attach_pos = std::numeric_limits<std::size_t>::max();
    for (int id = 0; id < entity_count; ++id) {
        if (auto m = fuzzy_match_span(question_toks, g.node(id).name, theta)) {
            const std::size_t pos = question_toks.tokens[m->token_begin].begin;
            if (pos < attach_pos) {
                attach_pos = pos;
                attach = id;
            }
        }
    }
    const auto* attach_para = paragraph_of(record, corpus, g.node(attach).name);
    const std::string attach_sentence =
        attach_para && !attach_para->empty() ? attach_para->front() : std::string();

    std::unordered_set<std::string> gold_titles;
    for (const auto& [title, idx] : record.supporting_facts) {
        (void)idx;
        gold_titles.insert(normalize_title(title));
    }
    for (const auto& [title, sentences] : record.context) {
        (void)sentences;
        if (gold_titles.count(normalize_title(title))) continue;
        if (g.find(title) >= 0) continue;
        g.add_extraction(attach, title, NodeKind::NegativeHop, 0, attach_sentence,
                         /*has_paragraph=*/corpus.lookup(title) != nullptr);
    }

    // Two negative answer nodes from random token windows of hop paragraphs.
    std::vector<std::pair<int, const std::vector<std::string>*>> hop_pool;
    for (const Node& n : g.nodes()) {
        if (n.kind != NodeKind::Hop && n.kind != NodeKind::NegativeHop) continue;
        if (const auto* para = paragraph_of(record, corpus, n.name)) {
            hop_pool.emplace_back(n.id, para);
        }
    }
    if (hop_pool.empty()) {
        throw TrainingError("record " + record.id +
                            ": no hop node available for negative-answer sampling");
    }
    SplitMix64 rng(seed ^ fnv1a(record.id));
    for (int want = 0; want < 2; ++want) {
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            const auto& [hid, para] = hop_pool[rng.below(hop_pool.size())];
            const auto si = rng.below(para->size());
            const TokenizedText st = tokenize((*para)[si]);
            if (st.tokens.empty()) continue;
            const std::size_t start = rng.below(st.tokens.size());
            const std::size_t max_len =
                std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.maxL)),
                                      st.tokens.size() - start);
            const std::size_t len = 1 + rng.below(max_len);
            const std::size_t b = st.tokens[start].begin;
            const std::size_t e = st.tokens[start + len - 1].end;
            const std::string text = st.raw.substr(b, e - b);
            if (g.find(text) >= 0) continue;  // resample on name collisions
            g.add_extraction(hid, text, NodeKind::NegativeAnswer, static_cast<int>(si), st.raw);
            placed = true;
        }
        if (!placed) {
            throw TrainingError("record " + record.id +
                                ": could not sample a distinct negative answer span");
        }
    }

    // Sems for every node, from the plugged System 1.
    for (int id = 0; id < g.node_count(); ++id) {
        Node& node = g.node(id);
        ExtractionInput input;
        input.question = record.question;
        input.mode = ExtractMode::Visit;
        for (const auto& clue : g.collect_clues(id)) input.clues.push_back(clue.sentence);
        if (node.kind == NodeKind::Hop || node.kind == NodeKind::NegativeHop) {
            if (const auto* para = paragraph_of(record, corpus, node.name)) {
                input.paragraph = *para;
            }
        }
        const ExtractionResult res = extractor.extract(input);
        if (!res.sem) {
            throw TrainingError("extractor returned no sem for node \"" + node.name + "\"");
        }
        node.sem = *res.sem;
    }

    if (sample.type == QuestionType::Special) {
        sample.gold_answer_node = g.answer_node();
        if (sample.gold_answer_node < 0) {
            throw TrainingError("record " + record.id + ": special question without answer node");
        }
    } else {
        if (entity_count < 2) {
            throw TrainingError("record " + record.id +
                                ": comparison question needs two gold entities");
        }
        std::vector<std::pair<std::size_t, int>> order;
        for (int id = 0; id < entity_count; ++id) {
            std::size_t pos = std::numeric_limits<std::size_t>::max();
            if (auto m = fuzzy_match_span(question_toks, g.node(id).name, theta)) {
                pos = question_toks.tokens[m->token_begin].begin;
            }
            order.emplace_back(pos, id);
        }
        std::sort(order.begin(), order.end());
        sample.cmp_x = order[0].second;
        sample.cmp_y = order[1].second;
        if (sample.type == QuestionType::General) {
            sample.cmp_label = normalize_answer(record.answer) == "yes";
        } else {
            const std::string ans = normalize_answer(record.answer);
            sample.cmp_label =
                similarity(ans, normalize_answer(g.node(sample.cmp_x).name)) >=
                similarity(ans, normalize_answer(g.node(sample.cmp_y).name));
        }
    }
    sample.graph = std::move(g);
    return sample;
}

namespace {

std::vector<int> answer_candidates(const CognitiveGraph& g) {
    std::vector<int> out;
    for (const Node& n : g.nodes()) {
        if (n.kind == NodeKind::Answer || n.kind == NodeKind::NegativeAnswer) out.push_back(n.id);
    }
    return out;
}

}  // namespace

PredictorGrads PredictorGrads::zero(int hidden) {
    PredictorGrads g;
    for (HeadGrads* h : {&g.special, &g.alternative, &g.general}) {
        h->dWa = Matrix::Zero(hidden, hidden);
        h->dba = Vector::Zero(hidden);
        h->dWb = Vector::Zero(hidden);
        h->dbb = 0.0;
    }
    return g;
}

double task2_backward(const TrainingSample& sample, const Matrix& X,
                      const PredictorParams& predictor, Matrix& dX, PredictorGrads& grads) {
    dX = Matrix::Zero(X.rows(), X.cols());
    if (sample.type == QuestionType::Special) {
        const std::vector<int> candidates = answer_candidates(sample.graph);
        if (candidates.empty()) throw TrainingError("sample has no answer candidates");
        const auto gold_it =
            std::find(candidates.begin(), candidates.end(), sample.gold_answer_node);
        if (gold_it == candidates.end()) {
            throw TrainingError("gold answer node is not an answer candidate");
        }
        Vector logits(static_cast<Eigen::Index>(candidates.size()));
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            logits(static_cast<Eigen::Index>(i)) =
                head_forward(predictor.special, X.row(candidates[i]).transpose());
        }
        const Vector probs = softmax(logits);
        const auto gold_idx = static_cast<Eigen::Index>(gold_it - candidates.begin());
        const double loss = -std::log(std::max(probs(gold_idx), kProbFloor));
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const double dlogit =
                probs(static_cast<Eigen::Index>(i)) - (static_cast<Eigen::Index>(i) == gold_idx ? 1.0 : 0.0);
            HeadGrads hg =
                head_backward(predictor.special, X.row(candidates[i]).transpose(), dlogit);
            dX.row(candidates[i]) += hg.dv.transpose();
            grads.special += hg;
        }
        return loss;
    }
    const HeadParams& head =
        sample.type == QuestionType::Alternative ? predictor.alternative : predictor.general;
    HeadGrads& head_grads =
        sample.type == QuestionType::Alternative ? grads.alternative : grads.general;
    const Vector diff = (X.row(sample.cmp_x) - X.row(sample.cmp_y)).transpose();
    const double z = head_forward(head, diff);
    const double p = sigmoid(z);
    const double t = sample.cmp_label ? 1.0 : 0.0;
    const double loss = -(t * std::log(std::max(p, kProbFloor)) +
                          (1.0 - t) * std::log(std::max(1.0 - p, kProbFloor)));
    HeadGrads hg = head_backward(head, diff, p - t);
    dX.row(sample.cmp_x) += hg.dv.transpose();
    dX.row(sample.cmp_y) -= hg.dv.transpose();
    head_grads += hg;
    return loss;
}

namespace {

// Adam over the fixed parameter enumeration below; weight decay 0.
class Adam {
public:
    Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(double lr, Checkpoint& ckpt, const Matrix& dW1, const Matrix& dW2,
              const PredictorGrads& pg) {
        ++t_;
        std::size_t slot = 0;
        auto update = [&](double* p, const double* g, Eigen::Index n) {
            if (slots_.size() <= slot) {
                slots_.push_back({Vector::Zero(n), Vector::Zero(n)});
            }
            auto& [m, v] = slots_[slot++];
            const double bc1 = 1.0 - std::pow(beta1_, t_);
            const double bc2 = 1.0 - std::pow(beta2_, t_);
            for (Eigen::Index i = 0; i < n; ++i) {
                m(i) = beta1_ * m(i) + (1.0 - beta1_) * g[i];
                v(i) = beta2_ * v(i) + (1.0 - beta2_) * g[i] * g[i];
                p[i] -= lr * (m(i) / bc1) / (std::sqrt(v(i) / bc2) + eps_);
            }
        };
        update(ckpt.reasoner.W1.data(), dW1.data(), dW1.size());
        update(ckpt.reasoner.W2.data(), dW2.data(), dW2.size());
        const std::pair<HeadParams*, const HeadGrads*> heads[] = {
            {&ckpt.predictor.special, &pg.special},
            {&ckpt.predictor.alternative, &pg.alternative},
            {&ckpt.predictor.general, &pg.general}};
        for (auto& [h, g] : heads) {
            update(h->Wa.data(), g->dWa.data(), g->dWa.size());
            update(h->ba.data(), g->dba.data(), g->dba.size());
            update(h->Wb.data(), g->dWb.data(), g->dWb.size());
            update(&h->bb, &g->dbb, 1);
        }
    }

private:
    double beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<std::pair<Vector, Vector>> slots_;
};

Matrix sems_matrix(const CognitiveGraph& g, int hidden) {
    Matrix x0 = Matrix::Zero(g.node_count(), hidden);
    for (const Node& n : g.nodes()) {
        if (n.sem) x0.row(n.id) = n.sem->transpose();
    }
    return x0;
}

}  // namespace

double task2_loss(const TrainingSample& sample, const Matrix& X,
                  const PredictorParams& predictor) {
    Matrix dx;
    PredictorGrads pg = PredictorGrads::zero(static_cast<int>(X.cols()));
    return task2_backward(sample, X, predictor, dx, pg);
}

double lr_at(int step, int total, double peak, double warmup_frac) {
    if (total <= 0) return 0.0;
    const int warm = std::max(1, static_cast<int>(std::ceil(warmup_frac * total)));
    if (step <= warm) return peak * static_cast<double>(step) / warm;
    if (total == warm) return peak;
    return peak * static_cast<double>(total - step) / static_cast<double>(total - warm);
}

TrainResult train_task2(const std::vector<TrainingSample>& samples, const TrainConfig& config) {
    if (samples.empty()) throw TrainingError("no training samples");
    TrainResult result;
    result.checkpoint = Checkpoint::init(config.hidden, config.seed);
    Checkpoint& ckpt = result.checkpoint;

    Adam adam(config.beta1, config.beta2, config.eps);
    const auto n_samples = static_cast<double>(samples.size());

    // Per-sample graph structure is fixed; cache the normalized adjacencies.
    std::vector<Matrix> adinvs;
    std::vector<Matrix> x0s;
    adinvs.reserve(samples.size());
    for (const TrainingSample& s : samples) {
        adinvs.push_back(normalize_adjacency(s.graph));
        x0s.push_back(sems_matrix(s.graph, config.hidden));
    }

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double total_loss = 0.0;
        Matrix dW1 = Matrix::Zero(config.hidden, config.hidden);
        Matrix dW2 = Matrix::Zero(config.hidden, config.hidden);
        PredictorGrads pg = PredictorGrads::zero(config.hidden);

        for (std::size_t i = 0; i < samples.size(); ++i) {
            const TrainingSample& sample = samples[i];
            const Vector alpha = Vector::Ones(sample.graph.node_count());
            const ForwardCache cache =
                forward_steps(x0s[i], adinvs[i], ckpt.reasoner, alpha, config.gnn_steps);
            Matrix dx;
            total_loss += task2_backward(sample, cache.x_final, ckpt.predictor, dx, pg);
            const ReasonerGrads rg =
                backward_steps(cache, adinvs[i], ckpt.reasoner, alpha, dx);
            dW1 += rg.dW1;
            dW2 += rg.dW2;
        }

        const double mean_loss = total_loss / n_samples;
        if (!std::isfinite(mean_loss)) {
            throw TrainingError("loss diverged at epoch " + std::to_string(epoch));
        }
        dW1 /= n_samples;
        dW2 /= n_samples;
        for (HeadGrads* h : {&pg.special, &pg.alternative, &pg.general}) {
            h->dWa /= n_samples;
            h->dba /= n_samples;
            h->dWb /= n_samples;
            h->dbb /= n_samples;
        }
        const double lr = lr_at(epoch, config.epochs, config.lr, config.warmup_frac);
        adam.step(lr, ckpt, dW1, dW2, pg);
        result.log.push_back({epoch, mean_loss, lr});
    }
    return result;
}

double training_accuracy(const std::vector<TrainingSample>& samples, const Checkpoint& ckpt,
                         int gnn_steps) {
    if (samples.empty()) return 0.0;
    int correct = 0;
    for (const TrainingSample& sample : samples) {
        const HiddenState hs = run_reasoner(sample.graph, ckpt.reasoner, gnn_steps);
        if (sample.type == QuestionType::Special) {
            const SpecialSelection sel =
                select_answer_special(sample.graph, hs.X, ckpt.predictor.special);
            if (sel.node == sample.gold_answer_node) ++correct;
        } else {
            const HeadParams& head = sample.type == QuestionType::Alternative
                                         ? ckpt.predictor.alternative
                                         : ckpt.predictor.general;
            if (select_answer_comparison(hs.X, sample.cmp_x, sample.cmp_y, head) ==
                sample.cmp_label) {
                ++correct;
            }
        }
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

void export_task1_supervision(const std::vector<QuestionRecord>& records,
                              const CorpusStore& corpus, double theta, std::ostream& out) {
    for (const QuestionRecord& record : records) {
        for (const SpanSupervision& sup : build_span_supervision(record, corpus, theta)) {
            json line;
            line["question"] = sup.question;
            line["title"] = sup.title;
            line["tokens"] = sup.tokens;
            line["gt_ans_start"] = std::vector<double>(sup.gt_ans_start.begin(), sup.gt_ans_start.end());
            line["gt_ans_end"] = std::vector<double>(sup.gt_ans_end.begin(), sup.gt_ans_end.end());
            line["gt_hop_start"] = std::vector<double>(sup.gt_hop_start.begin(), sup.gt_hop_start.end());
            line["gt_hop_end"] = std::vector<double>(sup.gt_hop_end.begin(), sup.gt_hop_end.end());
            line["is_negative"] = sup.is_negative;
            out << line.dump() << "\n";
        }
    }
}

}  // namespace hopqa
