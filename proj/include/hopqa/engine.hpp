#pragma once
// The question-answering orchestrator: initialization from question entities,
// the frontier loop coordinating System 1 and System 2, termination caps,
// answer prediction and supporting-fact selection.

#include "hopqa/checkpoint.hpp"
#include "hopqa/extractor.hpp"
#include "hopqa/graph.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hopqa {

struct EngineConfig {
    int max_nodes = 64;
    int max_visits = 256;
    int K = 5;
    int maxL = 10;
    int H = 64;
    int gnn_steps = 2;
    enum class UpdateMode { Asynchronous, BatchFinal };
    UpdateMode update_mode = UpdateMode::BatchFinal;
    double theta_match = 0.8;
    double tau0 = 0.5;

    ExtractorConfig extractor_config() const { return {K, maxL, H, tau0, theta_match}; }
};

struct RunDiagnostics {
    int visits = 0;
    int dropped_hop_spans = 0;  // hop spans that did not resolve in the corpus
    std::map<int, int> visit_counts;
    std::vector<std::pair<int, int>> growth;  // (node count, edge count) per visit
    bool comparison_fallback = false;
};

struct QAResult {
    std::string answer;
    int answer_node = -1;
    std::map<int, double> answer_probabilities;
    std::vector<std::pair<std::string, int>> supporting_facts;  // sorted (title, sent idx)
    CognitiveGraph graph;
    // dL/dalpha at alpha = 1, where L is the binary NLL of the predicted
    // answer's score (BCE of the comparison head for comparison questions).
    std::optional<Vector> relevance;
    QuestionType question_type = QuestionType::Special;
    RunDiagnostics diag;
};

class EngineError : public std::runtime_error {
public:
    enum class Code { NoQuestionEntities, NoAnswerCandidates };

    EngineError(Code code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Code code() const { return code_; }

    std::string_view code_string() const {
        return code_ == Code::NoQuestionEntities ? "no_question_entities"
                                                 : "no_answer_candidates";
    }

private:
    Code code_;
};

// The expansion loop alone: initialization, frontier visits, graph growth and
// per-visit sem updates. Exposed separately so invariants can be checked on
// runs whose prediction stage would fail.
struct ExpansionOutcome {
    CognitiveGraph graph;
    Matrix X;  // hidden rows (asynchronous mode) or sems (batch, pre-reasoner)
    std::vector<std::pair<int, std::size_t>> initial_entities;  // (node id, char offset in Q)
    RunDiagnostics diag;
};

ExpansionOutcome run_expansion(const std::string& question, const CorpusStore& corpus,
                               const Extractor& extractor, const ReasonerParams& reasoner,
                               const EngineConfig& config);

QAResult answer_question(const std::string& question, const CorpusStore& corpus,
                         const Extractor& extractor, const Checkpoint& ckpt,
                         const EngineConfig& config, bool want_relevance = false);

struct BatchItem {
    std::optional<QAResult> result;
    std::string error;       // empty on success
    std::string error_code;  // engine error code when applicable
};

// Per-question isolation over a shared immutable corpus and checkpoint;
// results come back in input order, failures recorded without aborting.
std::vector<BatchItem> answer_batch(const std::vector<std::string>& questions,
                                    const CorpusStore& corpus, const Extractor& extractor,
                                    const Checkpoint& ckpt, const EngineConfig& config,
                                    int jobs);

}  // namespace hopqa
