#pragma once
// Question-type routing and the three prediction heads: answer-node scoring
// for special questions and binary comparison heads for alternative/general
// questions. Each head is a two-layer FCN: Wb . gelu(Wa v + ba) + bb.

#include "hopqa/graph.hpp"
#include "hopqa/math.hpp"

#include <map>
#include <optional>
#include <string_view>

namespace hopqa {

struct HeadParams {
    Matrix Wa;  // H x H
    Vector ba;  // H
    Vector Wb;  // H
    double bb = 0.0;

    static HeadParams init(int hidden, SplitMix64& rng);
    static HeadParams zero(int hidden);
};

struct PredictorParams {
    HeadParams special;
    HeadParams alternative;
    HeadParams general;

    static PredictorParams init(int hidden, SplitMix64& rng);
};

enum class QuestionType { Special, Alternative, General };

std::string_view to_string(QuestionType type);

// With a training answer of yes/no the question is General. Otherwise a
// leading auxiliary/copular verb makes it Alternative when " or " appears and
// General when it does not; everything else is Special.
QuestionType classify_question(std::string_view question,
                               const std::optional<std::string>& answer = std::nullopt);

double head_forward(const HeadParams& head, const Eigen::Ref<const Vector>& v);

struct HeadGrads {
    Matrix dWa;
    Vector dba;
    Vector dWb;
    double dbb = 0.0;
    Vector dv;  // gradient w.r.t. the input vector

    HeadGrads& operator+=(const HeadGrads& other);
};

HeadGrads head_backward(const HeadParams& head, const Eigen::Ref<const Vector>& v, double dlogit);

class PredictorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SpecialSelection {
    int node = -1;
    std::map<int, double> probs;  // softmax over answer-kind nodes
};

// Softmax over Answer/NegativeAnswer node logits; argmax ties break to the
// lowest node id. Throws PredictorError when the graph has no answer nodes.
SpecialSelection select_answer_special(const CognitiveGraph& graph, const Matrix& X,
                                       const HeadParams& head);

// sigmoid(head(X[x] - X[y])) >= 0.5 picks the positive class (x / "yes").
bool select_answer_comparison(const Matrix& X, int x, int y, const HeadParams& head);

double comparison_logit(const Matrix& X, int x, int y, const HeadParams& head);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace hopqa
