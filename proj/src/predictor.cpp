#include "hopqa/predictor.hpp"

#include "hopqa/textmatch.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hopqa {

HeadParams HeadParams::init(int hidden, SplitMix64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    HeadParams p = HeadParams::zero(hidden);
    for (Eigen::Index i = 0; i < hidden; ++i) {
        for (Eigen::Index j = 0; j < hidden; ++j) p.Wa(i, j) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index i = 0; i < hidden; ++i) p.ba(i) = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < hidden; ++i) p.Wb(i) = rng.uniform(-bound, bound);
    p.bb = rng.uniform(-bound, bound);
    return p;
}

HeadParams HeadParams::zero(int hidden) {
    HeadParams p;
    p.Wa = Matrix::Zero(hidden, hidden);
    p.ba = Vector::Zero(hidden);
    p.Wb = Vector::Zero(hidden);
    p.bb = 0.0;
    return p;
}

PredictorParams PredictorParams::init(int hidden, SplitMix64& rng) {
    PredictorParams p;
    p.special = HeadParams::init(hidden, rng);
    p.alternative = HeadParams::init(hidden, rng);
    p.general = HeadParams::init(hidden, rng);
    return p;
}

std::string_view to_string(QuestionType type) {
    switch (type) {
        case QuestionType::Special: return "special";
        case QuestionType::Alternative: return "alternative";
        case QuestionType::General: return "general";
    }
    return "special";
}

QuestionType classify_question(std::string_view question,
                               const std::optional<std::string>& answer) {
    if (answer) {
        const std::string norm = normalize_answer(*answer);
        if (norm == "yes" || norm == "no") return QuestionType::General;
    }
    static const std::array<std::string_view, 13> kAux = {
        "is", "are", "was", "were", "do", "does", "did", "can", "could", "has", "have", "had",
        "am"};
    const TokenizedText toks = tokenize(question);
    if (toks.tokens.empty()) return QuestionType::Special;
    const std::string& first = toks.tokens.front().text;
    const bool aux = std::find(kAux.begin(), kAux.end(), first) != kAux.end();
    if (!aux) return QuestionType::Special;
    const bool has_or = std::any_of(toks.tokens.begin(), toks.tokens.end(),
                                    [](const Token& t) { return t.text == "or"; });
    return has_or ? QuestionType::Alternative : QuestionType::General;
}

double head_forward(const HeadParams& head, const Eigen::Ref<const Vector>& v) {
    return head.Wb.dot(gelu((head.Wa * v + head.ba).eval())) + head.bb;
}

HeadGrads& HeadGrads::operator+=(const HeadGrads& other) {
    dWa += other.dWa;
    dba += other.dba;
    dWb += other.dWb;
    dbb += other.dbb;
    return *this;
}

HeadGrads head_backward(const HeadParams& head, const Eigen::Ref<const Vector>& v,
                        double dlogit) {
    const Vector pre = head.Wa * v + head.ba;
    const Vector act = gelu(pre);
    HeadGrads g;
    g.dWb = dlogit * act;
    g.dbb = dlogit;
    const Vector dpre = dlogit * head.Wb.cwiseProduct(gelu_prime(pre));
    g.dWa = dpre * v.transpose();
    g.dba = dpre;
    g.dv = head.Wa.transpose() * dpre;
    return g;
}

SpecialSelection select_answer_special(const CognitiveGraph& graph, const Matrix& X,
                                       const HeadParams& head) {
    std::vector<int> candidates;
    for (const Node& n : graph.nodes()) {
        if (n.kind == NodeKind::Answer || n.kind == NodeKind::NegativeAnswer) {
            candidates.push_back(n.id);
        }
    }
    if (candidates.empty()) {
        throw PredictorError("no answer candidates in the graph");
    }
    Vector logits(static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        logits(static_cast<Eigen::Index>(i)) = head_forward(head, X.row(candidates[i]).transpose());
    }
    const Vector probs = softmax(logits);
    SpecialSelection sel;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        sel.probs[candidates[i]] = probs(static_cast<Eigen::Index>(i));
    }
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < logits.size(); ++i) {
        if (logits(i) > logits(best)) best = i;  // ties keep the lower node id
    }
    sel.node = candidates[static_cast<std::size_t>(best)];
    return sel;
}

double comparison_logit(const Matrix& X, int x, int y, const HeadParams& head) {
    const Vector diff = (X.row(x) - X.row(y)).transpose();
    return head_forward(head, diff);
}

bool select_answer_comparison(const Matrix& X, int x, int y, const HeadParams& head) {
    return sigmoid(comparison_logit(X, x, y, head)) >= 0.5;
}

}  // namespace hopqa
