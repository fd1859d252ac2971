#pragma once
// Evaluation: EM and F1 for answers and supporting facts, joint metrics
// (products of the component precision/recall), the logical-rigor ratio and
// per-question-type breakdown.

#include "hopqa/dataset.hpp"
#include "hopqa/predictor.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace hopqa {

struct MetricTriple {
    double em = 0.0;
    double f1 = 0.0;
    double prec = 0.0;
    double recall = 0.0;
};

// Answer EM/F1 on normalized strings; token-level multiset overlap for F1.
MetricTriple answer_metrics(const std::string& pred, const std::string& gold);

// Set precision/recall/F1 over (title, sentence index) pairs.
MetricTriple sp_metrics(const std::set<std::pair<std::string, int>>& pred,
                        const std::set<std::pair<std::string, int>>& gold);

// Joint precision/recall are the products of the Ans and Sup values; joint F1
// is recomputed from them; joint EM requires both exactly correct.
MetricTriple joint_metrics(const MetricTriple& ans, const MetricTriple& sup);

struct TypeReport {
    MetricTriple ans, sup, joint;
    int count = 0;
};

struct MetricsReport {
    MetricTriple ans, sup, joint;  // dataset means
    double logical_rigor = 0.0;    // mean Joint EM / mean Ans EM
    int count = 0;
    int missing_predictions = 0;
    std::map<std::string, TypeReport> per_type;  // special / alternative / general
};

// Predictions JSON: {"answer": {qid: str}, "sp": {qid: [[title, idx]]}}.
// Gold qids missing from the predictions score zero and are counted.
MetricsReport evaluate(const nlohmann::json& predictions,
                       const std::vector<QuestionRecord>& gold);

nlohmann::json report_to_json(const MetricsReport& report);

}  // namespace hopqa
