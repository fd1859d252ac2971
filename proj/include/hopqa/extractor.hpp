#pragma once
// System 1: the extraction interface (input assembly, span selection against
// the negative threshold at position 0, semantic vectors) plus the builtin
// deterministic lexical implementation.

#include "hopqa/corpus.hpp"
#include "hopqa/math.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hopqa {

enum class ExtractMode { InitQuestionOnly, Visit };

struct ExtractionInput {
    std::string question;
    std::vector<std::string> clues;                      // raw predecessor sentences
    std::optional<std::vector<std::string>> paragraph;   // para[x], when the node has one
    ExtractMode mode = ExtractMode::Visit;
};

// Probability vectors over token positions. Position 0 is the synthetic
// threshold slot; token t of the paragraph sits at position t + 1.
struct SpanScores {
    Vector start_probs;
    Vector end_probs;
};

// A selected span in paragraph token coordinates (start/end inclusive).
struct Span {
    std::string text;
    int start = 0;
    int end = 0;
    double score = 0.0;
};

struct ExtractionResult {
    std::vector<Span> hop_spans;
    std::vector<Span> ans_spans;
    std::optional<Vector> sem;
};

struct ExtractorConfig {
    int K = 5;
    int maxL = 10;
    int H = 64;
    double tau0 = 0.5;         // threshold-slot logit of the builtin scorer
    double theta_match = 0.8;  // fuzzy-match threshold
};

// Candidate spans in score-vector coordinates (start/end >= 1).
struct SpanCandidate {
    int start = 0;
    int end = 0;
    double score = 0.0;  // start probability
};

// Top-K starts (position 0 excluded), those below start_probs[0] discarded,
// end = argmax of end prob over [start, start+maxL] clamped to the sequence,
// ties to the smallest index; identical (start, end) deduplicated; ordered by
// descending start probability.
std::vector<SpanCandidate> select_spans(const SpanScores& scores, int K, int maxL);

// Flattened view of a sentence-list paragraph, mapping global token indexes
// back to sentences and char ranges.
struct ParagraphIndex {
    struct ParagraphToken {
        int sent_idx;
        std::size_t begin;  // char range within its sentence
        std::size_t end;
        std::string text;
    };
    std::vector<ParagraphToken> tokens;
    std::vector<int> sent_offset;  // token count before each sentence
    std::vector<std::string> sentences;

    int token_count() const { return static_cast<int>(tokens.size()); }
    // Raw text covered by tokens [start, end]; fragments from different
    // sentences are joined with a single space.
    std::string span_text(int start, int end) const;
    int sentence_of(int token) const { return tokens.at(static_cast<std::size_t>(token)).sent_idx; }
};

ParagraphIndex index_paragraph(const std::vector<std::string>& sentences);

class Extractor {
public:
    virtual ~Extractor() = default;
    virtual ExtractionResult extract(const ExtractionInput& input) const = 0;
};

// Deterministic lexical extractor. Hop candidates are gazetteer title
// mentions; answer candidates are noun-ish token runs in sentences that share
// content words with the question. Raw scores are token-overlap counts with
// question + clues (hop candidates weighted by title similarity); the
// threshold slot carries a fixed logit tau0 and everything goes through a
// softmax, so the discard rule is exercised exactly as with a neural scorer.
class BuiltinExtractor : public Extractor {
public:
    BuiltinExtractor(const CorpusStore& corpus, ExtractorConfig config)
        : corpus_(&corpus), config_(config) {}

    ExtractionResult extract(const ExtractionInput& input) const override;

    // (hop scores, answer scores) over the input paragraph.
    std::pair<SpanScores, SpanScores> score(const ExtractionInput& input) const;

    // Signed feature hashing of question + clues + paragraph into H buckets,
    // L2-normalized. Empty text hashes to the zero vector.
    Vector sem(const ExtractionInput& input) const;

    const ExtractorConfig& config() const { return config_; }

private:
    const CorpusStore* corpus_;
    ExtractorConfig config_;
};

}  // namespace hopqa
