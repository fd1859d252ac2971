#include "hopqa/predictor.hpp"

#include "testsupport.hpp"

#include <doctest.h>

using namespace hopqa;
namespace ts = hopqa::testsupport;

TEST_CASE("classify_question") {
    CHECK(classify_question("Where is the museum located?") == QuestionType::Special);
    CHECK(classify_question("Who founded the guild?") == QuestionType::Special);
    CHECK(classify_question("Is Alpha or Beta older?") == QuestionType::Alternative);
    CHECK(classify_question("Were Alpha and Beta both founded in 1901?") ==
          QuestionType::General);
    CHECK(classify_question("Does the tower have more floors?") == QuestionType::General);
    // Training mode: a yes/no answer decides regardless of wording.
    CHECK(classify_question("Which of the two came first?", std::string("yes")) ==
          QuestionType::General);
    CHECK(classify_question("Is Alpha or Beta older?", std::string("Alpha")) ==
          QuestionType::Alternative);
    // Unknown patterns default to Special.
    CHECK(classify_question("Name the river.") == QuestionType::Special);
    CHECK(classify_question("") == QuestionType::Special);
}

TEST_CASE("head_forward") {
    SUBCASE("all-zero parameters give logit zero") {
        const HeadParams head = HeadParams::zero(4);
        Vector v(4);
        v << 1.0, -2.0, 0.5, 3.0;
        CHECK(head_forward(head, v) == doctest::Approx(0.0));
    }
    SUBCASE("zero input reduces to Wb . gelu(ba) + bb") {
        SplitMix64 rng(3);
        HeadParams head = HeadParams::init(4, rng);
        const double want = head.Wb.dot(gelu(head.ba)) + head.bb;
        CHECK(head_forward(head, Vector::Zero(4)) == doctest::Approx(want));
    }
    SUBCASE("gradient w.r.t. the input matches finite differences") {
        SplitMix64 rng(5);
        const HeadParams head = HeadParams::init(6, rng);
        Vector v(6);
        for (int i = 0; i < 6; ++i) v(i) = rng.uniform(-1, 1);
        const HeadGrads g = head_backward(head, v, 1.0);
        for (int i = 0; i < 6; ++i) {
            const double fd = ts::central_diff(v(i), [&] { return head_forward(head, v); });
            CHECK(ts::rel_err(g.dv(i), fd) < 1e-4);
        }
        // Parameter gradients too.
        HeadParams mutable_head = head;
        auto loss = [&] { return head_forward(mutable_head, v); };
        const HeadGrads g2 = head_backward(mutable_head, v, 1.0);
        for (Eigen::Index i = 0; i < mutable_head.Wa.size(); ++i) {
            const double fd = ts::central_diff(mutable_head.Wa.data()[i], loss);
            CHECK(ts::rel_err(g2.dWa.data()[i], fd) < 1e-4);
        }
        for (Eigen::Index i = 0; i < 6; ++i) {
            CHECK(ts::rel_err(g2.dba(i), ts::central_diff(mutable_head.ba(i), loss)) < 1e-4);
            CHECK(ts::rel_err(g2.dWb(i), ts::central_diff(mutable_head.Wb(i), loss)) < 1e-4);
        }
        CHECK(ts::rel_err(g2.dbb, ts::central_diff(mutable_head.bb, loss)) < 1e-4);
    }
}

namespace {

// A head whose logit is gelu(v[0]), handy for readable argmax fixtures.
HeadParams first_coordinate_head(int hidden) {
    HeadParams head = HeadParams::zero(hidden);
    head.Wa(0, 0) = 1.0;
    head.Wb(0) = 1.0;
    return head;
}

CognitiveGraph answer_graph(int n_answers, int n_hops) {
    CognitiveGraph g;
    for (int i = 0; i < n_hops; ++i) {
        g.add_node("hop " + std::to_string(i), NodeKind::Hop, true);
    }
    for (int i = 0; i < n_answers; ++i) {
        g.add_node("ans " + std::to_string(i), NodeKind::Answer);
    }
    return g;
}

}  // namespace

TEST_CASE("select_answer_special") {
    const HeadParams head = first_coordinate_head(2);

    SUBCASE("single answer node wins with probability one") {
        const CognitiveGraph g = answer_graph(1, 1);
        Matrix x = Matrix::Zero(2, 2);
        const SpecialSelection sel = select_answer_special(g, x, head);
        CHECK(sel.node == 1);
        CHECK(sel.probs.at(1) == doctest::Approx(1.0));
    }
    SUBCASE("argmax over logits") {
        const CognitiveGraph g = answer_graph(3, 0);
        Matrix x = Matrix::Zero(3, 2);
        x(0, 0) = 1.2;
        x(1, 0) = 3.4;
        x(2, 0) = 0.1;
        const SpecialSelection sel = select_answer_special(g, x, head);
        CHECK(sel.node == 1);
        double sum = 0;
        for (const auto& [id, p] : sel.probs) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("exact ties break to the lower node id") {
        const CognitiveGraph g = answer_graph(2, 0);
        Matrix x = Matrix::Zero(2, 2);
        x(0, 0) = 2.0;
        x(1, 0) = 2.0;
        CHECK(select_answer_special(g, x, head).node == 0);
    }
    SUBCASE("hop nodes are excluded no matter their hidden state") {
        const CognitiveGraph g = answer_graph(2, 2);  // ids 0,1 hops; 2,3 answers
        Matrix x = Matrix::Zero(4, 2);
        x(0, 0) = 100.0;
        x(1, 0) = 90.0;
        x(2, 0) = 0.5;
        x(3, 0) = 0.1;
        const SpecialSelection sel = select_answer_special(g, x, head);
        CHECK(sel.node == 2);
        CHECK(sel.probs.count(0) == 0);
        CHECK(sel.probs.count(1) == 0);
    }
    SUBCASE("no answer nodes is an error") {
        const CognitiveGraph g = answer_graph(0, 2);
        Matrix x = Matrix::Zero(2, 2);
        CHECK_THROWS_AS(select_answer_special(g, x, head), PredictorError);
    }
    SUBCASE("argmax is invariant under a constant logit shift") {
        const CognitiveGraph g = answer_graph(3, 0);
        SplitMix64 rng(8);
        HeadParams h2 = HeadParams::init(2, rng);
        Matrix x = Matrix::Random(3, 2);
        const int before = select_answer_special(g, x, h2).node;
        h2.bb += 17.5;
        CHECK(select_answer_special(g, x, h2).node == before);
    }
}

TEST_CASE("select_answer_comparison") {
    SUBCASE("identical rows with zero bias sit on the boundary and pick the positive class") {
        const HeadParams head = HeadParams::zero(3);
        Matrix x = Matrix::Zero(2, 3);
        CHECK(comparison_logit(x, 0, 1, head) == doctest::Approx(0.0));
        CHECK(select_answer_comparison(x, 0, 1, head));
    }
    SUBCASE("the comparison input is exactly the row difference") {
        SplitMix64 rng(12);
        const HeadParams head = HeadParams::init(3, rng);
        Matrix x = Matrix::Random(2, 3);
        const Vector diff = (x.row(0) - x.row(1)).transpose();
        CHECK(comparison_logit(x, 0, 1, head) == doctest::Approx(head_forward(head, diff)));
        // Swapping operands negates the input vector.
        const Vector neg = (x.row(1) - x.row(0)).transpose();
        CHECK((diff + neg).norm() == doctest::Approx(0.0));
        // Shifting both rows by the same constant changes nothing.
        Matrix shifted = x;
        shifted.row(0).array() += 3.25;
        shifted.row(1).array() += 3.25;
        CHECK(comparison_logit(shifted, 0, 1, head) ==
              doctest::Approx(comparison_logit(x, 0, 1, head)));
    }
}
