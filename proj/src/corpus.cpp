#include "hopqa/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hopqa {

using nlohmann::json;

void CorpusStore::add(WikiDoc doc, std::size_t line_no) {
    if (doc.title.empty()) {
        throw CorpusError("line " + std::to_string(line_no) + ": empty title");
    }
    if (doc.sentences.empty()) {
        throw CorpusError("line " + std::to_string(line_no) + ": document \"" + doc.title +
                          "\" has no sentences");
    }
    if (by_title_.count(doc.title)) {
        throw CorpusError("line " + std::to_string(line_no) + ": duplicate title \"" +
                          doc.title + "\"");
    }
    const std::string norm = normalize_title(doc.title);
    const auto idx = docs_.size();
    by_title_.emplace(doc.title, idx);
    // First ingested doc wins a normalized-key collision; exact lookup still
    // reaches both.
    by_norm_.emplace(norm, idx);
    docs_.push_back(std::move(doc));
}

void CorpusStore::build_gazetteer() {
    by_token_count_.clear();
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        const std::size_t k = tokenize(docs_[i].title).tokens.size();
        if (k == 0) continue;
        if (by_token_count_.size() <= k) by_token_count_.resize(k + 1);
        by_token_count_[k].push_back(i);
    }
}

CorpusStore CorpusStore::ingest(std::istream& in) {
    CorpusStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("title") || !rec["title"].is_string() ||
            !rec.contains("sentences") || !rec["sentences"].is_array()) {
            throw CorpusError("line " + std::to_string(line_no) +
                              ": expected {\"title\": str, \"sentences\": [str, ...]}");
        }
        WikiDoc doc;
        doc.title = rec["title"].get<std::string>();
        for (const auto& s : rec["sentences"]) {
            if (!s.is_string()) {
                throw CorpusError("line " + std::to_string(line_no) +
                                  ": sentences must be strings");
            }
            doc.sentences.push_back(s.get<std::string>());
        }
        store.add(std::move(doc), line_no);
    }
    store.build_gazetteer();
    return store;
}

CorpusStore CorpusStore::ingest_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open " + path.string());
    return ingest(in);
}

CorpusStore CorpusStore::open(const std::filesystem::path& dir) {
    return ingest_file(dir / "docs.jsonl");
}

void CorpusStore::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "docs.jsonl");
    if (!out) throw CorpusError("cannot write " + (dir / "docs.jsonl").string());
    for (const auto& doc : docs_) {
        json rec;
        rec["title"] = doc.title;
        rec["sentences"] = doc.sentences;
        out << rec.dump() << "\n";
    }
}

const WikiDoc* CorpusStore::lookup(std::string_view title) const {
    if (auto it = by_title_.find(std::string(title)); it != by_title_.end()) {
        return &docs_[it->second];
    }
    if (auto it = by_norm_.find(normalize_title(title)); it != by_norm_.end()) {
        return &docs_[it->second];
    }
    return nullptr;
}

std::vector<TitleMention> CorpusStore::spot_title_mentions(std::string_view text,
                                                           double theta) const {
    constexpr std::size_t kMaxWindow = 6;
    const TokenizedText toks = tokenize(text);
    const std::size_t n = toks.tokens.size();

    std::vector<TitleMention> candidates;
    for (std::size_t start = 0; start < n; ++start) {
        for (std::size_t len = 1; len <= kMaxWindow && start + len <= n; ++len) {
            const std::size_t b = toks.tokens[start].begin;
            const std::size_t e = toks.tokens[start + len - 1].end;
            const std::string window = casefold(std::string_view(text).substr(b, e - b));

            // Exact hit on the normalized form cannot be beaten.
            if (auto it = by_norm_.find(normalize_title(window)); it != by_norm_.end()) {
                candidates.push_back({docs_[it->second].title, b, e, 1.0});
                continue;
            }
            const WikiDoc* best_doc = nullptr;
            double best_sim = 0.0;
            for (std::size_t tc = len >= 2 ? len - 1 : 1; tc <= len + 1; ++tc) {
                if (tc >= by_token_count_.size()) break;
                for (std::size_t di : by_token_count_[tc]) {
                    const std::string& title = docs_[di].title;
                    const std::size_t lw = window.size(), lt = title.size();
                    const std::size_t diff = lw > lt ? lw - lt : lt - lw;
                    if (static_cast<double>(diff) > (1.0 - theta) * std::max(lw, lt)) continue;
                    const double sim = similarity(window, casefold(title));
                    if (sim > best_sim) {
                        best_sim = sim;
                        best_doc = &docs_[di];
                    }
                }
            }
            if (best_doc && best_sim >= theta) {
                candidates.push_back({best_doc->title, b, e, best_sim});
            }
        }
    }

    // Of overlapping windows matching the same title, keep the best-similarity
    // one (a sloppy longer window must not shadow an exact mention).
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const TitleMention& a, const TitleMention& b) {
                         if (a.similarity != b.similarity) return a.similarity > b.similarity;
                         if (a.begin != b.begin) return a.begin < b.begin;
                         return a.end - a.begin < b.end - b.begin;
                     });
    std::vector<TitleMention> deduped;
    for (const auto& c : candidates) {
        const bool shadowed =
            std::any_of(deduped.begin(), deduped.end(), [&](const TitleMention& p) {
                return p.title == c.title && c.begin < p.end && p.begin < c.end;
            });
        if (!shadowed) deduped.push_back(c);
    }

    // Across titles: longest-first, ties leftmost; greedy non-overlap selection.
    std::stable_sort(deduped.begin(), deduped.end(),
                     [](const TitleMention& a, const TitleMention& b) {
                         const auto la = a.end - a.begin, lb = b.end - b.begin;
                         if (la != lb) return la > lb;
                         if (a.begin != b.begin) return a.begin < b.begin;
                         return a.similarity > b.similarity;
                     });
    std::vector<TitleMention> picked;
    for (const auto& c : deduped) {
        const bool overlaps = std::any_of(picked.begin(), picked.end(), [&](const TitleMention& p) {
            return c.begin < p.end && p.begin < c.end;
        });
        if (!overlaps) picked.push_back(c);
    }
    std::sort(picked.begin(), picked.end(),
              [](const TitleMention& a, const TitleMention& b) { return a.begin < b.begin; });
    return picked;
}

}  // namespace hopqa
