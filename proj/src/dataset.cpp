#include "hopqa/dataset.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace hopqa {

using nlohmann::json;

std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open " + path.string());
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw DatasetError(path.string() + ": " + e.what());
    }
    if (!root.is_array()) throw DatasetError(path.string() + ": expected a JSON array");

    std::vector<QuestionRecord> records;
    records.reserve(root.size());
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& r = root[i];
        if (!r.is_object() || !r.contains("question")) {
            throw DatasetError(path.string() + ": record " + std::to_string(i) +
                               " is not a question object");
        }
        QuestionRecord rec;
        rec.id = r.value("_id", "q" + std::to_string(i));
        rec.question = r.at("question").get<std::string>();
        rec.answer = r.value("answer", "");
        rec.type = r.value("type", "");
        if (r.contains("supporting_facts")) {
            for (const auto& sf : r["supporting_facts"]) {
                rec.supporting_facts.emplace_back(sf.at(0).get<std::string>(),
                                                  sf.at(1).get<int>());
            }
        }
        if (r.contains("context")) {
            for (const auto& ctx : r["context"]) {
                std::vector<std::string> sents;
                for (const auto& s : ctx.at(1)) sents.push_back(s.get<std::string>());
                rec.context.emplace_back(ctx.at(0).get<std::string>(), std::move(sents));
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace hopqa
