#include "hopqa/textmatch.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace hopqa {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

char lower_ascii(unsigned char c) {
    return static_cast<char>(std::tolower(c));
}

}  // namespace

std::string casefold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(lower_ascii(c));
    return out;
}

TokenizedText tokenize(std::string_view text) {
    TokenizedText out;
    out.raw.assign(text);
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
        Token tok;
        tok.begin = i;
        tok.end = j;
        tok.text = casefold(text.substr(i, j - i));
        out.tokens.push_back(std::move(tok));
        i = j;
    }
    return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double similarity(std::string_view a, std::string_view b) {
    const std::size_t m = std::max(a.size(), b.size());
    if (m == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

std::optional<FuzzyMatch> fuzzy_match_span(const TokenizedText& sentence,
                                           std::string_view target, double theta) {
    const std::size_t n = sentence.tokens.size();
    const std::size_t target_tokens = tokenize(target).tokens.size();
    if (n == 0 || target_tokens == 0) return std::nullopt;

    const std::string folded_target = casefold(target);
    const std::size_t min_len = target_tokens > 2 ? target_tokens - 2 : 1;
    const std::size_t max_len = std::min(n, target_tokens + 2);

    std::optional<FuzzyMatch> best;
    for (std::size_t start = 0; start < n; ++start) {
        for (std::size_t len = min_len; len <= max_len && start + len <= n; ++len) {
            const std::size_t last = start + len - 1;
            const std::size_t b = sentence.tokens[start].begin;
            const std::size_t e = sentence.tokens[last].end;
            const std::string window = casefold(std::string_view(sentence.raw).substr(b, e - b));
            const double sim = similarity(window, folded_target);
            if (sim < theta) continue;
            const bool better =
                !best || sim > best->similarity ||
                (sim == best->similarity &&
                 (start < best->token_begin ||
                  (start == best->token_begin && last < best->token_end)));
            if (better) {
                best = FuzzyMatch{start, last, sim, sentence.raw.substr(b, e - b)};
            }
        }
    }
    return best;
}

namespace {

std::string strip_punct_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if (c < 0x80 && std::ispunct(c)) continue;
        out.push_back(lower_ascii(c));
    }
    return out;
}

std::string collapse_ws(std::string_view s, bool drop_articles) {
    static const std::array<std::string_view, 3> kArticles = {"a", "an", "the"};
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i >= s.size()) break;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        const std::string_view word = s.substr(i, j - i);
        const bool skip = drop_articles &&
                          std::find(kArticles.begin(), kArticles.end(), word) != kArticles.end();
        if (!skip) {
            if (!out.empty()) out.push_back(' ');
            out.append(word);
        }
        i = j;
    }
    return out;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
    return collapse_ws(strip_punct_lower(s), /*drop_articles=*/true);
}

std::string normalize_title(std::string_view s) {
    return collapse_ws(strip_punct_lower(s), /*drop_articles=*/false);
}

}  // namespace hopqa
