#include "testsupport.hpp"

#include "hopqa/reasoner.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace hopqa::testsupport {

using nlohmann::json;

namespace {

const std::vector<std::string>& syllables() {
    static const std::vector<std::string> v = {"bar", "den",  "fal", "gor", "hul", "jin", "kor",
                                               "lam", "mer",  "nor", "pel", "quin", "ris", "sul",
                                               "tor", "vex",  "wim", "yor", "zan", "bul"};
    return v;
}

const std::vector<std::string>& categories() {
    static const std::vector<std::string> v = {"tower",   "company", "guild",   "museum",
                                               "castle",  "bridge",  "temple",  "harbor",
                                               "garden",  "archive", "theater", "monument",
                                               "factory", "academy", "foundry", "observatory"};
    return v;
}

const std::vector<std::string>& relations() {
    static const std::vector<std::string> v = {"built",    "founded",  "designed", "commissioned",
                                               "restored", "managed",  "funded",   "acquired",
                                               "expanded", "renovated", "curated",  "endowed"};
    return v;
}

const std::vector<std::string>& first_names() {
    static const std::vector<std::string> v = {"Mira",  "Gregor", "Isla",  "Orin",
                                               "Sable", "Tessa",  "Vern",  "Lyra",
                                               "Edric", "Nola",   "Joren", "Petra"};
    return v;
}

const std::vector<std::string>& last_names() {
    static const std::vector<std::string> v = {"Sole",    "Hale", "Vorn",   "Quist",
                                               "Marsh",   "Fenn", "Ryle",   "Ashford",
                                               "Colt",    "Brine", "Veckar", "Dunmore"};
    return v;
}

const std::vector<std::string>& fillers() {
    static const std::vector<std::string> v = {"velum", "dorun", "pasek", "quillan",
                                               "norim", "setal", "imbru", "ovlan",
                                               "teshi", "ralqu", "undim", "brosk"};
    return v;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

class WorldGen {
public:
    explicit WorldGen(std::uint64_t seed) : rng_(seed) {}

    SplitMix64& rng() { return rng_; }

    std::string fresh_title() {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const std::string name = capitalize(syl() + syl()) + " " + capitalize(syl() + syl());
            if (!distinct(name)) continue;
            names_.push_back(normalize_title(name));
            return name;
        }
        throw std::runtime_error("fixture name pool exhausted");
    }

    std::string fresh_person() {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const std::string name = first_names()[rng_.below(first_names().size())] + " " +
                                     last_names()[rng_.below(last_names().size())];
            if (!distinct(name)) continue;
            names_.push_back(normalize_title(name));
            return name;
        }
        throw std::runtime_error("fixture person pool exhausted");
    }

    const std::string& category() { return categories()[rng_.below(categories().size())]; }
    const std::string& relation() { return relations()[rng_.below(relations().size())]; }

    std::string filler_sentence() {
        std::string s = capitalize(fillers()[rng_.below(fillers().size())]);
        for (int i = 0; i < 3; ++i) {
            s += " " + fillers()[rng_.below(fillers().size())];
        }
        return s + ".";
    }

private:
    std::string syl() { return syllables()[rng_.below(syllables().size())]; }

    // Keep every generated name well-separated in edit distance.
    bool distinct(const std::string& name) const {
        const std::string norm = normalize_title(name);
        return std::all_of(names_.begin(), names_.end(), [&](const std::string& other) {
            return similarity(norm, other) < 0.7;
        });
    }

    SplitMix64 rng_;
    std::vector<std::string> names_;
};

std::string link_sentence(const std::string& category, const std::string& relation,
                          const std::string& target) {
    return "The " + category + " was " + relation + " by " + target + ".";
}

}  // namespace

SyntheticWorld make_world(std::uint64_t seed, int n_distractors, int n_two_hop, int n_three_hop,
                          int n_dag, int n_cyclic) {
    WorldGen gen(seed);

    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    auto add_doc = [&](const std::string& title, std::vector<std::string> sentences) {
        docs.emplace_back(title, std::move(sentences));
    };

    std::vector<std::string> distractors;
    for (int i = 0; i < n_distractors; ++i) {
        const std::string title = gen.fresh_title();
        distractors.push_back(title);
        add_doc(title, {gen.filler_sentence(), gen.filler_sentence()});
    }

    SyntheticWorld world;
    auto doc_sentences = [&](const std::string& title) -> const std::vector<std::string>& {
        for (const auto& [t, s] : docs) {
            if (t == title) return s;
        }
        throw std::runtime_error("unknown fixture doc " + title);
    };

    auto finish_record = [&](QuestionRecord rec, const std::vector<std::string>& gold_titles) {
        for (const auto& t : gold_titles) rec.context.emplace_back(t, doc_sentences(t));
        std::unordered_set<std::size_t> picked;
        while (picked.size() < 8 && picked.size() < distractors.size()) {
            picked.insert(gen.rng().below(distractors.size()));
        }
        for (std::size_t di : picked) {
            rec.context.emplace_back(distractors[di], doc_sentences(distractors[di]));
        }
        world.records.push_back(std::move(rec));
    };

    int qid = 0;
    auto next_id = [&] { return "q" + std::to_string(qid++); };

    for (int i = 0; i < n_two_hop; ++i) {
        const std::string a = gen.fresh_title(), b = gen.fresh_title();
        const std::string cat_a = gen.category(), cat_b = gen.category();
        const std::string rel1 = gen.relation(), rel2 = gen.relation();
        const std::string ans = gen.fresh_person();
        add_doc(a, {gen.filler_sentence(), link_sentence(cat_a, rel1, b)});
        add_doc(b, {gen.filler_sentence(), link_sentence(cat_b, rel2, ans)});
        QuestionRecord rec;
        rec.id = next_id();
        rec.question = "Who " + rel2 + " the " + cat_b + " that " + rel1 + " " + a + "?";
        rec.answer = ans;
        rec.type = "bridge";
        rec.supporting_facts = {{a, 1}, {b, 1}};
        finish_record(std::move(rec), {a, b});
    }

    for (int i = 0; i < n_three_hop; ++i) {
        const std::string a = gen.fresh_title(), b = gen.fresh_title(), c = gen.fresh_title();
        const std::string cat_a = gen.category(), cat_b = gen.category(), cat_c = gen.category();
        const std::string rel1 = gen.relation(), rel2 = gen.relation(), rel3 = gen.relation();
        const std::string ans = gen.fresh_person();
        add_doc(a, {gen.filler_sentence(), link_sentence(cat_a, rel1, b)});
        add_doc(b, {gen.filler_sentence(), link_sentence(cat_b, rel2, c)});
        add_doc(c, {gen.filler_sentence(), link_sentence(cat_c, rel3, ans)});
        QuestionRecord rec;
        rec.id = next_id();
        rec.question = "Who " + rel3 + " the " + cat_c + " that " + rel2 + " the " + cat_b +
                       " that " + rel1 + " " + a + "?";
        rec.answer = ans;
        rec.type = "bridge";
        rec.supporting_facts = {{a, 1}, {b, 1}, {c, 1}};
        finish_record(std::move(rec), {a, b, c});
    }

    for (int i = 0; i < n_dag; ++i) {
        const std::string a1 = gen.fresh_title(), a2 = gen.fresh_title(), b = gen.fresh_title();
        const std::string cat_a1 = gen.category(), cat_a2 = gen.category(),
                          cat_b = gen.category();
        const std::string rel1 = gen.relation(), rel2 = gen.relation(), rel3 = gen.relation();
        const std::string ans = gen.fresh_person();
        add_doc(a1, {gen.filler_sentence(), link_sentence(cat_a1, rel1, b)});
        add_doc(a2, {gen.filler_sentence(), link_sentence(cat_a2, rel2, b)});
        add_doc(b, {gen.filler_sentence(), link_sentence(cat_b, rel3, ans)});
        QuestionRecord rec;
        rec.id = next_id();
        rec.question = "Who " + rel3 + " the " + cat_b + " that " + rel1 + " " + a1 + " and " +
                       rel2 + " " + a2 + "?";
        rec.answer = ans;
        rec.type = "bridge";
        rec.supporting_facts = {{a1, 1}, {a2, 1}, {b, 1}};
        finish_record(std::move(rec), {a1, a2, b});
    }

    for (int i = 0; i < n_cyclic; ++i) {
        const std::string a = gen.fresh_title(), b = gen.fresh_title();
        const std::string cat_a = gen.category(), cat_b = gen.category();
        const std::string rel1 = gen.relation(), relc = gen.relation(), rel3 = gen.relation();
        const std::string ans = gen.fresh_person();
        add_doc(a, {gen.filler_sentence(), link_sentence(cat_a, rel1, b)});
        add_doc(b, {gen.filler_sentence(), link_sentence(cat_b, relc, a),
                    link_sentence(cat_b, rel3, ans)});
        QuestionRecord rec;
        rec.id = next_id();
        rec.question = "Who " + rel3 + " the " + cat_b + " that " + rel1 + " " + a + "?";
        rec.answer = ans;
        rec.type = "bridge";
        rec.supporting_facts = {{a, 1}, {b, 1}, {b, 2}};
        finish_record(std::move(rec), {a, b});
    }

    std::ostringstream jsonl;
    for (const auto& [title, sentences] : docs) {
        jsonl << json{{"title", title}, {"sentences", sentences}}.dump() << "\n";
    }
    world.corpus_jsonl = jsonl.str();
    std::istringstream in(world.corpus_jsonl);
    world.corpus = CorpusStore::ingest(in);
    return world;
}

RandomWorld make_random_world(std::uint64_t seed) {
    WorldGen gen(seed);
    SplitMix64& rng = gen.rng();
    static const std::vector<std::string> vocab = {"alpha", "beta",  "gamma", "delta", "omega",
                                                   "sigma", "fact",  "note",  "trace", "line"};

    const std::size_t n_docs = 12 + rng.below(12);
    std::vector<std::string> titles;
    for (std::size_t i = 0; i < n_docs; ++i) titles.push_back(gen.fresh_title());

    std::ostringstream jsonl;
    for (std::size_t i = 0; i < n_docs; ++i) {
        const std::size_t n_sents = 2 + rng.below(3);
        std::vector<std::string> sentences;
        for (std::size_t s = 0; s < n_sents; ++s) {
            if (rng.below(2) == 0) {
                const std::string& target = titles[rng.below(titles.size())];
                sentences.push_back("The " + vocab[rng.below(vocab.size())] + " was " +
                                    vocab[rng.below(vocab.size())] + " by " + target + ".");
            } else {
                sentences.push_back("The " + vocab[rng.below(vocab.size())] + " holds " +
                                    vocab[rng.below(vocab.size())] + " " +
                                    vocab[rng.below(vocab.size())] + ".");
            }
        }
        jsonl << json{{"title", titles[i]}, {"sentences", sentences}}.dump() << "\n";
    }

    RandomWorld world;
    std::istringstream in(jsonl.str());
    world.corpus = CorpusStore::ingest(in);
    const std::size_t n_questions = 4 + rng.below(5);
    for (std::size_t i = 0; i < n_questions; ++i) {
        world.questions.push_back("What " + vocab[rng.below(vocab.size())] + " links " +
                                  titles[rng.below(titles.size())] + " and " +
                                  vocab[rng.below(vocab.size())] + "?");
    }
    return world;
}

double PipelineFixture::loss() const {
    const ForwardCache cache = forward_steps(x0, adinv, ckpt.reasoner, alpha, steps);
    return task2_loss(sample, cache.x_final, ckpt.predictor);
}

PipelineFixture make_pipeline_fixture(std::uint64_t seed, int max_nodes, int hidden, int steps) {
    SplitMix64 rng(seed);
    PipelineFixture fx;
    fx.steps = steps;
    fx.ckpt = Checkpoint::init(hidden, rng.next());

    const int n = 3 + static_cast<int>(rng.below(static_cast<std::size_t>(std::max(1, max_nodes - 2))));
    CognitiveGraph g;
    for (int i = 0; i < n; ++i) {
        NodeKind kind = NodeKind::Hop;
        if (i == n - 2) kind = NodeKind::Answer;
        if (i == n - 1) kind = NodeKind::NegativeAnswer;
        g.add_node("node " + std::to_string(i), kind, kind == NodeKind::Hop);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (rng.uniform() < 0.4) {
                g.add_extraction(i, g.node(j).name, g.node(j).kind, 0, "edge sentence");
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        Vector sem(hidden);
        for (int h = 0; h < hidden; ++h) sem(h) = rng.uniform(-1.0, 1.0);
        g.node(i).sem = sem;
    }

    fx.alpha = Vector(n);
    for (int i = 0; i < n; ++i) fx.alpha(i) = rng.uniform(0.3, 1.0);
    fx.x0 = Matrix::Zero(n, hidden);
    for (int i = 0; i < n; ++i) fx.x0.row(i) = g.node(i).sem->transpose();
    fx.adinv = normalize_adjacency(g);

    fx.sample.qid = "fixture";
    fx.sample.question = "";
    fx.sample.type = QuestionType::Special;
    fx.sample.gold_answer_node = n - 2;
    fx.sample.graph = std::move(g);
    return fx;
}

}  // namespace hopqa::testsupport
