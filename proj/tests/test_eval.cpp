#include "hopqa/evalmetrics.hpp"

#include "metrics_oracle.hpp"
#include "testsupport.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <algorithm>

using namespace hopqa;
namespace ts = hopqa::testsupport;
using nlohmann::json;

TEST_CASE("answer_metrics examples") {
    SUBCASE("exact yes") {
        const MetricTriple m = answer_metrics("yes", "yes");
        CHECK(m.em == 1.0);
        CHECK(m.f1 == doctest::Approx(1.0));
        CHECK(m.prec == doctest::Approx(1.0));
        CHECK(m.recall == doctest::Approx(1.0));
    }
    SUBCASE("token overlap") {
        const MetricTriple m = answer_metrics("New York City", "York City");
        CHECK(m.em == 0.0);
        CHECK(m.prec == doctest::Approx(2.0 / 3.0));
        CHECK(m.recall == doctest::Approx(1.0));
        CHECK(m.f1 == doctest::Approx(0.8));
    }
    SUBCASE("article removal gives exact match") {
        const MetricTriple m = answer_metrics("The Senate", "Senate");
        CHECK(m.em == 1.0);
        CHECK(m.f1 == doctest::Approx(1.0));
    }
    SUBCASE("empty cases") {
        const MetricTriple both = answer_metrics("", "");
        CHECK(both.em == 1.0);
        CHECK(both.f1 == 1.0);
        const MetricTriple one = answer_metrics("", "something");
        CHECK(one.em == 0.0);
        CHECK(one.f1 == 0.0);
    }
}

TEST_CASE("sp_metrics examples") {
    using Facts = std::set<std::pair<std::string, int>>;
    SUBCASE("identical sets") {
        const Facts f = {{"A", 0}, {"B", 2}};
        const MetricTriple m = sp_metrics(f, f);
        CHECK(m.em == 1.0);
        CHECK(m.f1 == doctest::Approx(1.0));
    }
    SUBCASE("two of four gold plus two spurious") {
        const Facts gold = {{"A", 0}, {"A", 1}, {"B", 0}, {"B", 1}};
        const Facts pred = {{"A", 0}, {"B", 0}, {"C", 0}, {"C", 1}};
        const MetricTriple m = sp_metrics(pred, gold);
        CHECK(m.prec == doctest::Approx(0.5));
        CHECK(m.recall == doctest::Approx(0.5));
        CHECK(m.f1 == doctest::Approx(0.5));
        CHECK(m.em == 0.0);
    }
    SUBCASE("empty prediction against nonempty gold") {
        const MetricTriple m = sp_metrics({}, {{"A", 0}});
        CHECK(m.em == 0.0);
        CHECK(m.f1 == 0.0);
        CHECK(m.prec == 0.0);
        CHECK(m.recall == 0.0);
    }
    SUBCASE("both empty") {
        const MetricTriple m = sp_metrics({}, {});
        CHECK(m.em == 1.0);
        CHECK(m.f1 == 1.0);
    }
}

TEST_CASE("joint_metrics examples") {
    SUBCASE("joint precision is the product of the parts") {
        MetricTriple ans, sup;
        ans.prec = 0.5;
        sup.prec = 0.4;
        CHECK(joint_metrics(ans, sup).prec == doctest::Approx(0.2));
    }
    SUBCASE("both perfect") {
        const MetricTriple one{1, 1, 1, 1};
        const MetricTriple m = joint_metrics(one, one);
        CHECK(m.em == 1.0);
        CHECK(m.f1 == doctest::Approx(1.0));
    }
    SUBCASE("harmonic mean of joint precision and recall") {
        MetricTriple ans{0, 0, 0.4, 1.0}, sup{0, 0, 0.5, 0.6};
        const MetricTriple m = joint_metrics(ans, sup);
        CHECK(m.prec == doctest::Approx(0.2));
        CHECK(m.recall == doctest::Approx(0.6));
        CHECK(m.f1 == doctest::Approx(0.3));
    }
    SUBCASE("zero precision and recall give zero f1") {
        CHECK(joint_metrics({}, {}).f1 == 0.0);
    }
}

namespace {

std::vector<QuestionRecord> tiny_gold() {
    std::vector<QuestionRecord> gold(2);
    gold[0].id = "a";
    gold[0].question = "Who built the tower?";
    gold[0].answer = "Carol Hale";
    gold[0].supporting_facts = {{"T", 0}, {"U", 1}};
    gold[1].id = "b";
    gold[1].question = "Who owns the archive?";
    gold[1].answer = "Orin Fenn";
    gold[1].supporting_facts = {{"V", 2}};
    return gold;
}

json perfect_predictions(const std::vector<QuestionRecord>& gold) {
    json pred;
    pred["answer"] = json::object();
    pred["sp"] = json::object();
    for (const auto& r : gold) {
        pred["answer"][r.id] = r.answer;
        json sp = json::array();
        for (const auto& [t, i] : r.supporting_facts) sp.push_back({t, i});
        pred["sp"][r.id] = sp;
    }
    return pred;
}

}  // namespace

TEST_CASE("evaluate") {
    const auto gold = tiny_gold();

    SUBCASE("gold as predictions scores all ones") {
        const MetricsReport r = evaluate(perfect_predictions(gold), gold);
        CHECK(r.ans.em == doctest::Approx(1.0));
        CHECK(r.sup.f1 == doctest::Approx(1.0));
        CHECK(r.joint.em == doctest::Approx(1.0));
        CHECK(r.logical_rigor == doctest::Approx(1.0));
        CHECK(r.count == 2);
        CHECK(r.missing_predictions == 0);
    }
    SUBCASE("half right") {
        json pred = perfect_predictions(gold);
        pred["answer"]["b"] = "wrong";
        pred["sp"]["b"] = json::array();
        const MetricsReport r = evaluate(pred, gold);
        CHECK(r.ans.em == doctest::Approx(0.5));
        CHECK(r.joint.em == doctest::Approx(0.5));
        CHECK(r.logical_rigor == doctest::Approx(1.0));
    }
    SUBCASE("correct answers but empty supporting facts: rigor collapses") {
        json pred = perfect_predictions(gold);
        pred["sp"]["a"] = json::array();
        pred["sp"]["b"] = json::array();
        const MetricsReport r = evaluate(pred, gold);
        CHECK(r.ans.em == doctest::Approx(1.0));
        CHECK(r.joint.em == doctest::Approx(0.0));
        CHECK(r.logical_rigor == doctest::Approx(0.0));
    }
    SUBCASE("missing qid scores zero and is counted") {
        json pred;
        pred["answer"] = json::object();
        pred["sp"] = json::object();
        pred["answer"]["a"] = gold[0].answer;
        json sp = json::array();
        for (const auto& [t, i] : gold[0].supporting_facts) sp.push_back({t, i});
        pred["sp"]["a"] = sp;
        const MetricsReport r = evaluate(pred, gold);
        CHECK(r.missing_predictions == 1);
        CHECK(r.ans.em == doctest::Approx(0.5));
    }
    SUBCASE("evaluation is permutation invariant") {
        auto shuffled = gold;
        std::reverse(shuffled.begin(), shuffled.end());
        const MetricsReport a = evaluate(perfect_predictions(gold), gold);
        const MetricsReport b = evaluate(perfect_predictions(gold), shuffled);
        CHECK(a.ans.f1 == doctest::Approx(b.ans.f1));
        CHECK(a.joint.em == doctest::Approx(b.joint.em));
    }
    SUBCASE("per-type breakdown uses the question classifier") {
        std::vector<QuestionRecord> mixed = tiny_gold();
        QuestionRecord alt;
        alt.id = "c";
        alt.question = "Is T or U older?";
        alt.answer = "T";
        mixed.push_back(alt);
        QuestionRecord gen;
        gen.id = "d";
        gen.question = "Did T outlast U?";
        gen.answer = "yes";
        mixed.push_back(gen);
        const MetricsReport r = evaluate(perfect_predictions(mixed), mixed);
        CHECK(r.per_type.at("special").count == 2);
        CHECK(r.per_type.at("alternative").count == 1);
        CHECK(r.per_type.at("general").count == 1);
        const json jr = report_to_json(r);
        CHECK(jr["per_type"].contains("special"));
        CHECK(jr["logical_rigor"].get<double>() == doctest::Approx(1.0));
    }
}

TEST_CASE("metrics agree with the naive oracle on random cases") {
    SplitMix64 rng(123);
    const std::vector<std::string> words = {"alpha", "beta", "the", "gamma", "delta", "city"};
    auto random_phrase = [&](std::size_t max_words) {
        std::string s;
        const std::size_t n = rng.below(max_words + 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (!s.empty()) s.push_back(' ');
            s += words[rng.below(words.size())];
        }
        return s;
    };
    auto random_facts = [&](std::size_t max_facts) {
        std::set<std::pair<std::string, int>> f;
        const std::size_t n = rng.below(max_facts + 1);
        for (std::size_t i = 0; i < n; ++i) {
            f.insert({words[rng.below(3)], static_cast<int>(rng.below(3))});
        }
        return f;
    };

    for (int it = 0; it < 100; ++it) {
        const std::string pred = random_phrase(4), gold = random_phrase(4);
        const auto pf = random_facts(4), gf = random_facts(4);

        const MetricTriple ans = answer_metrics(pred, gold);
        const ts::NaiveTriple nans = ts::naive_answer(pred, gold);
        CHECK(ans.em == doctest::Approx(nans.em));
        CHECK(ans.f1 == doctest::Approx(nans.f1));
        CHECK(ans.prec == doctest::Approx(nans.prec));
        CHECK(ans.recall == doctest::Approx(nans.recall));

        const MetricTriple sup = sp_metrics(pf, gf);
        const ts::NaiveTriple nsup = ts::naive_sp(pf, gf);
        CHECK(sup.f1 == doctest::Approx(nsup.f1));
        CHECK(sup.em == doctest::Approx(nsup.em));

        const MetricTriple joint = joint_metrics(ans, sup);
        const ts::NaiveTriple njoint = ts::naive_joint(nans, nsup);
        CHECK(joint.prec == doctest::Approx(njoint.prec));
        CHECK(joint.f1 == doctest::Approx(njoint.f1));
        // Per-question invariants.
        CHECK(joint.em <= std::min(ans.em, sup.em) + 1e-12);
        CHECK(joint.prec == doctest::Approx(ans.prec * sup.prec));
        if (ans.prec > 0 && ans.recall > 0) {
            CHECK(ans.f1 >= std::min(ans.prec, ans.recall) - 1e-12);
            CHECK(ans.f1 <= std::max(ans.prec, ans.recall) + 1e-12);
        }
        CHECK((ans.f1 == 0.0) == (ans.prec * ans.recall == 0.0));
    }
}
