#pragma once
// Training: span-extraction supervision targets and loss, Task #2 sample
// construction (gold-only graph plus negative nodes), the full-batch Adam
// loop with warmup-then-linear-decay, and supervision export for external
// extractors.

#include "hopqa/checkpoint.hpp"
#include "hopqa/extractor.hpp"
#include "hopqa/graph.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>

namespace hopqa {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Targets over token positions of one paragraph; position 0 is the threshold
// slot, token t sits at position t + 1. Answer targets are one-hot, hop
// targets spread 1/k over the k span starts (and ends), and negative
// paragraphs put all mass on position 0.
struct SpanSupervision {
    std::string question;
    std::string title;
    std::vector<std::string> tokens;
    Vector gt_ans_start, gt_ans_end, gt_hop_start, gt_hop_end;
    bool is_negative = false;
};

// One entry per gold paragraph and per negative context paragraph.
std::vector<SpanSupervision> build_span_supervision(const QuestionRecord& record,
                                                    const CorpusStore& corpus, double theta);

// Sum of the four cross-entropy terms (ans/hop x start/end); predictions are
// clamped at 1e-12.
double span_loss(const SpanScores& hop, const SpanScores& ans, const SpanSupervision& gt);

struct TrainingSample {
    std::string qid;
    std::string question;
    QuestionType type = QuestionType::Special;
    CognitiveGraph graph;        // gold-only graph + negative nodes, sems filled
    int gold_answer_node = -1;   // Special questions
    int cmp_x = -1, cmp_y = -1;  // comparison questions; x = first-mentioned
    bool cmp_label = false;      // true = x wins / "yes"
    bool answer_grounded = true;

    nlohmann::json to_json() const;
    static TrainingSample from_json(const nlohmann::json& j);
};

// Gold graph + one NegativeHop node per negative context paragraph (attached
// to the first question-entity node) + two NegativeAnswer nodes sampled from
// random token windows with the seeded generator. Sems come from the plugged
// extractor. The per-record RNG stream is SplitMix64(seed ^ fnv1a(qid)).
TrainingSample build_task2_sample(const QuestionRecord& record, const CorpusStore& corpus,
                                  const Extractor& extractor, const ExtractorConfig& config,
                                  double theta, std::uint64_t seed);

// Special: NLL of the gold node under the softmax over answer candidates.
// Alternative/General: binary cross entropy of the comparison head.
double task2_loss(const TrainingSample& sample, const Matrix& X,
                  const PredictorParams& predictor);

struct PredictorGrads {
    HeadGrads special, alternative, general;

    static PredictorGrads zero(int hidden);
};

// Loss plus dL/dX and predictor-parameter gradients for one sample.
double task2_backward(const TrainingSample& sample, const Matrix& X,
                      const PredictorParams& predictor, Matrix& dX, PredictorGrads& grads);

// Warmup to `peak` over the first ceil(total * warmup_frac) steps, then
// linear decay to zero at `total`. Steps are 1-based.
double lr_at(int step, int total, double peak, double warmup_frac = 0.1);

struct TrainConfig {
    int hidden = 64;
    int gnn_steps = 2;
    int epochs = 300;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double warmup_frac = 0.1;
    std::uint64_t seed = 0;
};

struct EpochLog {
    int epoch;
    double loss;  // mean loss before this epoch's update
    double lr;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<EpochLog> log;
};

// Full-batch Adam over reasoner + predictor parameters (weight decay 0),
// deterministic for a fixed seed and sample order. Throws TrainingError when
// the loss stops being finite.
TrainResult train_task2(const std::vector<TrainingSample>& samples, const TrainConfig& config);

// Fraction of samples whose prediction matches the gold target.
double training_accuracy(const std::vector<TrainingSample>& samples, const Checkpoint& ckpt,
                         int gnn_steps);

// JSONL, one line per (question, paragraph), deterministic ordering.
void export_task1_supervision(const std::vector<QuestionRecord>& records,
                              const CorpusStore& corpus, double theta, std::ostream& out);

}  // namespace hopqa
