#pragma once
// HotpotQA-shaped dataset records: question, answer, supporting facts and the
// per-question context paragraphs used for training ingestion.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hopqa {

struct QuestionRecord {
    std::string id;
    std::string question;
    std::string answer;
    std::string type;  // as annotated in the dataset; informational only
    std::vector<std::pair<std::string, int>> supporting_facts;        // (title, sent idx)
    std::vector<std::pair<std::string, std::vector<std::string>>> context;  // (title, sentences)
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// JSON array of records: [{"_id","question","answer","type",
// "supporting_facts":[[title, idx]], "context":[[title,[sent,...]]]}]
std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path);

}  // namespace hopqa
