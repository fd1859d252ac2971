#include "hopqa/evalmetrics.hpp"

#include "hopqa/textmatch.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>

namespace hopqa {

using nlohmann::json;

MetricTriple answer_metrics(const std::string& pred, const std::string& gold) {
    const std::string np = normalize_answer(pred);
    const std::string ng = normalize_answer(gold);
    MetricTriple m;
    m.em = np == ng ? 1.0 : 0.0;
    if (np.empty() && ng.empty()) return {1.0, 1.0, 1.0, 1.0};
    if (np.empty() || ng.empty()) return m;  // f1/prec/recall stay 0

    std::map<std::string, int> gold_bag;
    int gold_count = 0;
    for (const Token& t : tokenize(ng).tokens) {
        ++gold_bag[t.text];
        ++gold_count;
    }
    int pred_count = 0;
    int overlap = 0;
    for (const Token& t : tokenize(np).tokens) {
        ++pred_count;
        auto it = gold_bag.find(t.text);
        if (it != gold_bag.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return m;
    m.prec = static_cast<double>(overlap) / pred_count;
    m.recall = static_cast<double>(overlap) / gold_count;
    m.f1 = 2.0 * m.prec * m.recall / (m.prec + m.recall);
    return m;
}

MetricTriple sp_metrics(const std::set<std::pair<std::string, int>>& pred,
                        const std::set<std::pair<std::string, int>>& gold) {
    if (pred.empty() && gold.empty()) return {1.0, 1.0, 1.0, 1.0};
    MetricTriple m;
    m.em = pred == gold ? 1.0 : 0.0;
    if (pred.empty() || gold.empty()) return m;
    int overlap = 0;
    for (const auto& p : pred) overlap += gold.count(p) ? 1 : 0;
    if (overlap == 0) return m;
    m.prec = static_cast<double>(overlap) / static_cast<double>(pred.size());
    m.recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    m.f1 = 2.0 * m.prec * m.recall / (m.prec + m.recall);
    return m;
}

MetricTriple joint_metrics(const MetricTriple& ans, const MetricTriple& sup) {
    MetricTriple m;
    m.em = ans.em * sup.em;
    m.prec = ans.prec * sup.prec;
    m.recall = ans.recall * sup.recall;
    m.f1 = (m.prec + m.recall) > 0.0 ? 2.0 * m.prec * m.recall / (m.prec + m.recall) : 0.0;
    return m;
}

namespace {

void accumulate(MetricTriple& acc, const MetricTriple& m) {
    acc.em += m.em;
    acc.f1 += m.f1;
    acc.prec += m.prec;
    acc.recall += m.recall;
}

void divide(MetricTriple& acc, int n) {
    if (n == 0) return;
    acc.em /= n;
    acc.f1 /= n;
    acc.prec /= n;
    acc.recall /= n;
}

json triple_to_json(const MetricTriple& m) {
    return {{"em", m.em}, {"f1", m.f1}, {"prec", m.prec}, {"recall", m.recall}};
}

}  // namespace

MetricsReport evaluate(const json& predictions, const std::vector<QuestionRecord>& gold) {
    const json answers = predictions.value("answer", json::object());
    const json sps = predictions.value("sp", json::object());

    MetricsReport report;
    report.count = static_cast<int>(gold.size());
    for (const QuestionRecord& record : gold) {
        std::string pred_answer;
        std::set<std::pair<std::string, int>> pred_sp;
        const bool have_answer = answers.contains(record.id);
        if (have_answer) pred_answer = answers[record.id].get<std::string>();
        if (sps.contains(record.id)) {
            for (const auto& f : sps[record.id]) {
                pred_sp.insert({f.at(0).get<std::string>(), f.at(1).get<int>()});
            }
        }
        if (!have_answer && !sps.contains(record.id)) ++report.missing_predictions;

        std::set<std::pair<std::string, int>> gold_sp(record.supporting_facts.begin(),
                                                      record.supporting_facts.end());
        const MetricTriple ans = answer_metrics(pred_answer, record.answer);
        const MetricTriple sup = sp_metrics(pred_sp, gold_sp);
        const MetricTriple joint = joint_metrics(ans, sup);

        accumulate(report.ans, ans);
        accumulate(report.sup, sup);
        accumulate(report.joint, joint);

        const std::string type(to_string(classify_question(record.question, record.answer)));
        TypeReport& tr = report.per_type[type];
        accumulate(tr.ans, ans);
        accumulate(tr.sup, sup);
        accumulate(tr.joint, joint);
        ++tr.count;
    }
    divide(report.ans, report.count);
    divide(report.sup, report.count);
    divide(report.joint, report.count);
    for (auto& [type, tr] : report.per_type) {
        (void)type;
        divide(tr.ans, tr.count);
        divide(tr.sup, tr.count);
        divide(tr.joint, tr.count);
    }
    report.logical_rigor = report.ans.em > 0.0 ? report.joint.em / report.ans.em : 0.0;
    return report;
}

json report_to_json(const MetricsReport& report) {
    json j;
    j["ans"] = triple_to_json(report.ans);
    j["sup"] = triple_to_json(report.sup);
    j["joint"] = triple_to_json(report.joint);
    j["logical_rigor"] = report.logical_rigor;
    j["count"] = report.count;
    j["missing_predictions"] = report.missing_predictions;
    j["per_type"] = json::object();
    for (const auto& [type, tr] : report.per_type) {
        j["per_type"][type] = {{"ans", triple_to_json(tr.ans)},
                               {"sup", triple_to_json(tr.sup)},
                               {"joint", triple_to_json(tr.joint)},
                               {"count", tr.count}};
    }
    return j;
}

}  // namespace hopqa
