#pragma once
// The document store: titled documents with ordered sentences, a normalized
// title index for lookup, and a gazetteer for spotting title mentions in
// free text. Immutable after build, so it can be shared across concurrent
// question runs.

#include "hopqa/textmatch.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hopqa {

struct WikiDoc {
    std::string title;
    std::vector<std::string> sentences;
};

struct TitleMention {
    std::string title;  // canonical title as ingested
    std::size_t begin;  // char span in the source text, [begin, end)
    std::size_t end;
    double similarity;
};

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CorpusStore {
public:
    // One JSON document per line: {"title": str, "sentences": [str, ...]}.
    // Throws CorpusError on malformed records (with the line number) and on
    // duplicate titles.
    static CorpusStore ingest(std::istream& in);
    static CorpusStore ingest_file(const std::filesystem::path& path);

    // Directory layout: <dir>/docs.jsonl; the index is rebuilt on open.
    static CorpusStore open(const std::filesystem::path& dir);
    void save(const std::filesystem::path& dir) const;

    // Exact title hit, else normalized-title hit, else nullptr.
    const WikiDoc* lookup(std::string_view title) const;

    // All maximal title mentions in `text` at similarity >= theta. Windows of
    // 1..6 tokens are matched against the gazetteer; overlaps are resolved
    // longest-first, ties leftmost. Result is non-overlapping, sorted by
    // start offset.
    std::vector<TitleMention> spot_title_mentions(std::string_view text, double theta) const;

    std::size_t size() const { return docs_.size(); }
    const std::vector<WikiDoc>& docs() const { return docs_; }

private:
    void add(WikiDoc doc, std::size_t line_no);
    void build_gazetteer();

    std::vector<WikiDoc> docs_;
    std::unordered_map<std::string, std::size_t> by_title_;
    std::unordered_map<std::string, std::size_t> by_norm_;
    // Gazetteer: title doc indexes bucketed by token count, for fuzzy
    // matching with a bounded candidate set.
    std::vector<std::vector<std::size_t>> by_token_count_;
};

}  // namespace hopqa
