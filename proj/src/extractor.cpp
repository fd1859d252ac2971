#include "hopqa/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_set>

namespace hopqa {

namespace {

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> kStop = {
        "a",    "an",   "and",  "are",  "as",    "at",   "be",    "been",  "by",   "can",
        "could", "did",  "do",   "does", "for",   "from", "had",   "has",   "have", "he",
        "her",  "his",  "how",  "in",   "is",    "it",   "its",   "no",    "not",  "of",
        "on",   "or",   "she",  "that", "the",   "their", "these", "they",  "this", "those",
        "to",   "was",  "were", "what", "when",  "where", "which", "who",   "whom", "whose",
        "why",  "will", "with", "would", "yes"};
    return kStop;
}

std::unordered_set<std::string> token_set(const std::string& text) {
    std::unordered_set<std::string> out;
    for (const Token& t : tokenize(text).tokens) out.insert(t.text);
    return out;
}

// Distinct shared tokens between a sentence and the query bag.
int overlap_count(const TokenizedText& sentence, const std::unordered_set<std::string>& query) {
    std::unordered_set<std::string> seen;
    int n = 0;
    for (const Token& t : sentence.tokens) {
        if (query.count(t.text) && seen.insert(t.text).second) ++n;
    }
    return n;
}

bool noun_ish(const TokenizedText& sentence, std::size_t ti) {
    const Token& tok = sentence.tokens[ti];
    if (stopwords().count(tok.text)) return false;
    const char first = sentence.raw[tok.begin];
    if (first >= 'A' && first <= 'Z') return true;
    return std::any_of(tok.text.begin(), tok.text.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

struct RawCandidate {
    int start;  // global token indexes, inclusive
    int end;
    double score;
};

}  // namespace

ParagraphIndex index_paragraph(const std::vector<std::string>& sentences) {
    ParagraphIndex idx;
    idx.sentences = sentences;
    idx.sent_offset.reserve(sentences.size());
    for (std::size_t si = 0; si < sentences.size(); ++si) {
        idx.sent_offset.push_back(static_cast<int>(idx.tokens.size()));
        for (const Token& t : tokenize(sentences[si]).tokens) {
            idx.tokens.push_back({static_cast<int>(si), t.begin, t.end, t.text});
        }
    }
    return idx;
}

std::string ParagraphIndex::span_text(int start, int end) const {
    std::string out;
    int i = start;
    while (i <= end) {
        const int si = tokens[static_cast<std::size_t>(i)].sent_idx;
        int j = i;
        while (j + 1 <= end && tokens[static_cast<std::size_t>(j + 1)].sent_idx == si) ++j;
        const std::size_t b = tokens[static_cast<std::size_t>(i)].begin;
        const std::size_t e = tokens[static_cast<std::size_t>(j)].end;
        if (!out.empty()) out.push_back(' ');
        out.append(sentences[static_cast<std::size_t>(si)].substr(b, e - b));
        i = j + 1;
    }
    return out;
}

std::vector<SpanCandidate> select_spans(const SpanScores& scores, int K, int maxL) {
    const auto len = static_cast<int>(scores.start_probs.size());
    if (len <= 1) return {};
    std::vector<int> order(static_cast<std::size_t>(len - 1));
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores.start_probs(a) != scores.start_probs(b)) {
            return scores.start_probs(a) > scores.start_probs(b);
        }
        return a < b;
    });
    if (static_cast<int>(order.size()) > K) order.resize(static_cast<std::size_t>(K));

    const double threshold = scores.start_probs(0);
    std::vector<SpanCandidate> out;
    for (int start : order) {
        if (scores.start_probs(start) < threshold) continue;
        const int hi = std::min(start + maxL, len - 1);
        int end = start;
        for (int j = start + 1; j <= hi; ++j) {
            if (scores.end_probs(j) > scores.end_probs(end)) end = j;
        }
        const bool dup = std::any_of(out.begin(), out.end(), [&](const SpanCandidate& c) {
            return c.start == start && c.end == end;
        });
        if (!dup) out.push_back({start, end, scores.start_probs(start)});
    }
    return out;
}

namespace {

SpanScores scores_from_candidates(const std::vector<RawCandidate>& candidates, int token_count,
                                  double tau0) {
    Vector start_logits = Vector::Zero(token_count + 1);
    Vector end_logits = Vector::Zero(token_count + 1);
    start_logits(0) = tau0;
    end_logits(0) = tau0;
    for (const RawCandidate& c : candidates) {
        start_logits(c.start + 1) = std::max(start_logits(c.start + 1), c.score);
        end_logits(c.end + 1) = std::max(end_logits(c.end + 1), c.score);
    }
    return {softmax(start_logits), softmax(end_logits)};
}

}  // namespace

std::pair<SpanScores, SpanScores> BuiltinExtractor::score(const ExtractionInput& input) const {
    const std::vector<std::string>& sentences = *input.paragraph;
    const ParagraphIndex para = index_paragraph(sentences);

    std::string query_text = input.question;
    for (const auto& clue : input.clues) {
        query_text.push_back(' ');
        query_text.append(clue);
    }
    const std::unordered_set<std::string> query = token_set(query_text);

    std::unordered_set<std::string> focus;
    for (const Token& t : tokenize(input.question).tokens) {
        if (!stopwords().count(t.text)) focus.insert(t.text);
    }

    std::vector<RawCandidate> hop_candidates;
    std::vector<RawCandidate> ans_candidates;
    const int span_tokens = std::max(1, config_.maxL);

    for (std::size_t si = 0; si < sentences.size(); ++si) {
        const TokenizedText st = tokenize(sentences[si]);
        if (st.tokens.empty()) continue;
        const int base = para.sent_offset[si];
        const int overlap = overlap_count(st, query);

        // Hop candidates: gazetteer title mentions, weighted by match quality.
        if (overlap > 0) {
            for (const TitleMention& m :
                 corpus_->spot_title_mentions(sentences[si], config_.theta_match)) {
                int first = -1, last = -1;
                for (std::size_t ti = 0; ti < st.tokens.size(); ++ti) {
                    if (st.tokens[ti].begin >= m.begin && st.tokens[ti].end <= m.end) {
                        if (first < 0) first = static_cast<int>(ti);
                        last = static_cast<int>(ti);
                    }
                }
                if (first < 0) continue;
                hop_candidates.push_back(
                    {base + first, base + last, overlap * m.similarity});
            }
        }

        // Answer candidates: noun-ish runs in sentences that touch the
        // question's content words.
        const bool in_focus = std::any_of(st.tokens.begin(), st.tokens.end(), [&](const Token& t) {
            return focus.count(t.text) > 0;
        });
        if (in_focus && overlap > 0) {
            std::size_t ti = 0;
            while (ti < st.tokens.size()) {
                if (!noun_ish(st, ti)) {
                    ++ti;
                    continue;
                }
                std::size_t tj = ti;
                while (tj + 1 < st.tokens.size() && noun_ish(st, tj + 1)) ++tj;
                const std::size_t run_end =
                    std::min(tj, ti + static_cast<std::size_t>(span_tokens) - 1);
                ans_candidates.push_back({base + static_cast<int>(ti),
                                          base + static_cast<int>(run_end),
                                          static_cast<double>(overlap)});
                ti = tj + 1;
            }
        }
    }

    return {scores_from_candidates(hop_candidates, para.token_count(), config_.tau0),
            scores_from_candidates(ans_candidates, para.token_count(), config_.tau0)};
}

Vector BuiltinExtractor::sem(const ExtractionInput& input) const {
    std::string text = input.question;
    for (const auto& clue : input.clues) {
        text.push_back(' ');
        text.append(clue);
    }
    if (input.paragraph) {
        for (const auto& s : *input.paragraph) {
            text.push_back(' ');
            text.append(s);
        }
    }
    Vector v = Vector::Zero(config_.H);
    for (const Token& t : tokenize(text).tokens) {
        const std::uint64_t h = fnv1a(t.text);
        const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(config_.H));
        const double sign = ((h >> 32) & 1ull) ? 1.0 : -1.0;
        v(bucket) += sign;
    }
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    return v;
}

namespace {

std::vector<Span> to_spans(const std::vector<SpanCandidate>& candidates,
                           const ParagraphIndex& para) {
    std::vector<Span> spans;
    spans.reserve(candidates.size());
    for (const SpanCandidate& c : candidates) {
        spans.push_back({para.span_text(c.start - 1, c.end - 1), c.start - 1, c.end - 1, c.score});
    }
    return spans;
}

}  // namespace

ExtractionResult BuiltinExtractor::extract(const ExtractionInput& input) const {
    ExtractionResult result;
    if (input.mode == ExtractMode::InitQuestionOnly) {
        // Only the question exists in the input: treat it as the paragraph
        // and run the hop scorer; no semantic vector at this stage.
        ExtractionInput init;
        init.question = input.question;
        init.paragraph = std::vector<std::string>{input.question};
        const ParagraphIndex para = index_paragraph(*init.paragraph);
        auto [hop, ans] = score(init);
        (void)ans;
        result.hop_spans = to_spans(select_spans(hop, config_.K, config_.maxL), para);
        return result;
    }
    if (!input.paragraph) {
        result.sem = sem(input);
        return result;
    }
    const ParagraphIndex para = index_paragraph(*input.paragraph);
    auto [hop, ans] = score(input);
    result.hop_spans = to_spans(select_spans(hop, config_.K, config_.maxL), para);
    result.ans_spans = to_spans(select_spans(ans, config_.K, config_.maxL), para);
    result.sem = sem(input);
    return result;
}

}  // namespace hopqa
