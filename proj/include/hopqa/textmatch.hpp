#pragma once
// Tokenization, edit distance, fuzzy span matching and answer/title
// normalization. Shared by graph building, the builtin extractor and the
// evaluation metrics. Everything here is a pure function.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hopqa {

struct Token {
    std::string text;   // lowercased
    std::size_t begin;  // char offsets into the raw string, [begin, end)
    std::size_t end;
};

struct TokenizedText {
    std::string raw;
    std::vector<Token> tokens;
};

struct FuzzyMatch {
    std::size_t token_begin;  // inclusive token index range
    std::size_t token_end;
    double similarity;
    std::string matched_text;  // raw slice covered by the window
};

// Lowercased alphanumeric word tokens split on whitespace/punctuation.
// Bytes >= 0x80 are treated as word characters so UTF-8 sequences stay intact.
TokenizedText tokenize(std::string_view text);

// Minimum edit distance with unit-cost insert/delete/substitute.
std::size_t levenshtein(std::string_view a, std::string_view b);

// 1 - levenshtein(a, b) / max(|a|, |b|); 1 when both strings are empty.
double similarity(std::string_view a, std::string_view b);

// Best token window of length within +-2 tokens of the target's token count,
// scored by case-folded similarity of the window's raw text against the
// target. Returned iff similarity >= theta. Ties: higher similarity, then
// leftmost, then shorter.
std::optional<FuzzyMatch> fuzzy_match_span(const TokenizedText& sentence,
                                           std::string_view target, double theta);

// SQuAD-style: lowercase, drop punctuation, drop articles {a, an, the},
// collapse whitespace.
std::string normalize_answer(std::string_view s);

// Title key: lowercase, drop punctuation, collapse whitespace. Input is
// assumed NFC; no separate Unicode normalization pass is applied.
std::string normalize_title(std::string_view s);

// ASCII lowercase.
std::string casefold(std::string_view s);

}  // namespace hopqa
