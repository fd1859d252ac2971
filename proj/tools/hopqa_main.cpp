// hopqa: multi-hop question answering over a cognitive graph.
//
// Subcommands: ingest, build-gold, train, answer, predict, eval.
// Exit codes: 0 ok, 1 input error, 2 numeric failure, 3 QA-level failure.

#include "hopqa/checkpoint.hpp"
#include "hopqa/engine.hpp"
#include "hopqa/evalmetrics.hpp"
#include "hopqa/remote.hpp"
#include "hopqa/training.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace {

using hopqa::EngineConfig;
using nlohmann::json;

struct RunConfig {
    int max_nodes = 64;
    int max_visits = 256;
    int K = 5;
    int maxL = 10;
    int H = 64;
    int gnn_steps = 2;
    std::string update_mode = "batch";  // batch | async
    double theta_match = 0.8;
    double tau0 = 0.5;
    double lr = 1e-4;
    int epochs = 300;
    double warmup_frac = 0.1;
    std::uint64_t seed = 42;
    double remote_timeout = 30.0;
    int jobs = 1;
    std::string extractor = "builtin";  // builtin | http(s) endpoint
    std::string config_file;            // consumed by the early pre-scan

    EngineConfig engine() const {
        EngineConfig e;
        e.max_nodes = max_nodes;
        e.max_visits = max_visits;
        e.K = K;
        e.maxL = maxL;
        e.H = H;
        e.gnn_steps = gnn_steps;
        e.update_mode = update_mode == "async" ? EngineConfig::UpdateMode::Asynchronous
                                               : EngineConfig::UpdateMode::BatchFinal;
        e.theta_match = theta_match;
        e.tau0 = tau0;
        return e;
    }

    json to_json() const {
        return {{"max_nodes", max_nodes}, {"max_visits", max_visits}, {"K", K},
                {"maxL", maxL},           {"H", H},                   {"gnn_steps", gnn_steps},
                {"update_mode", update_mode}, {"theta_match", theta_match}, {"tau0", tau0},
                {"lr", lr},               {"epochs", epochs},         {"warmup_frac", warmup_frac},
                {"seed", seed},           {"remote_timeout", remote_timeout}, {"jobs", jobs},
                {"extractor", extractor}};
    }

    void validate() const {
        if (max_nodes < 1) throw std::invalid_argument("max_nodes must be >= 1");
        if (max_visits < max_nodes) {
            throw std::invalid_argument("max_visits must be >= max_nodes");
        }
        if (K < 1) throw std::invalid_argument("K must be >= 1");
        if (maxL < 0) throw std::invalid_argument("maxL must be >= 0");
        if (H < 1) throw std::invalid_argument("hidden dimension must be >= 1");
        if (gnn_steps < 1) throw std::invalid_argument("gnn_steps must be >= 1");
        if (theta_match <= 0.0 || theta_match > 1.0) {
            throw std::invalid_argument("theta_match must lie in (0, 1]");
        }
        if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
        if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
        if (update_mode != "batch" && update_mode != "async") {
            throw std::invalid_argument("update_mode must be batch or async");
        }
    }

    void apply_json(const json& j) {
        max_nodes = j.value("max_nodes", max_nodes);
        max_visits = j.value("max_visits", max_visits);
        K = j.value("K", K);
        maxL = j.value("maxL", maxL);
        H = j.value("H", H);
        gnn_steps = j.value("gnn_steps", gnn_steps);
        update_mode = j.value("update_mode", update_mode);
        theta_match = j.value("theta_match", theta_match);
        tau0 = j.value("tau0", tau0);
        lr = j.value("lr", lr);
        epochs = j.value("epochs", epochs);
        warmup_frac = j.value("warmup_frac", warmup_frac);
        seed = j.value("seed", seed);
        remote_timeout = j.value("remote_timeout", remote_timeout);
        jobs = j.value("jobs", jobs);
        extractor = j.value("extractor", extractor);
    }
};

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--config", cfg.config_file,
                    "JSON config file; flags override its values");
    cmd->add_option("--seed", cfg.seed, "Seed for all randomness")->capture_default_str();
    cmd->add_option("--theta-match", cfg.theta_match, "Fuzzy-match threshold")
        ->capture_default_str();
    cmd->add_option("--hidden", cfg.H, "Hidden dimension")->capture_default_str();
    cmd->add_option("--gnn-steps", cfg.gnn_steps, "Batch propagation steps")
        ->capture_default_str();
    cmd->add_option("--k", cfg.K, "Top-K span starts")->capture_default_str();
    cmd->add_option("--max-l", cfg.maxL, "Maximum span length in tokens")->capture_default_str();
    cmd->add_option("--tau0", cfg.tau0, "Builtin threshold-slot logit")->capture_default_str();
}

void echo_config(const RunConfig& cfg) {
    cfg.validate();
    std::cerr << "config: " << cfg.to_json().dump() << "\n";
}

std::unique_ptr<hopqa::Extractor> make_extractor(const RunConfig& cfg,
                                                 const hopqa::CorpusStore& corpus) {
    if (cfg.extractor == "builtin") {
        return std::make_unique<hopqa::BuiltinExtractor>(
            corpus, hopqa::ExtractorConfig{cfg.K, cfg.maxL, cfg.H, cfg.tau0, cfg.theta_match});
    }
    return std::make_unique<hopqa::RemoteExtractor>(
        cfg.extractor, hopqa::ExtractorConfig{cfg.K, cfg.maxL, cfg.H, cfg.tau0, cfg.theta_match},
        cfg.remote_timeout);
}

int cmd_ingest(const RunConfig& cfg, const std::string& wiki, const std::string& out) {
    (void)cfg;
    const hopqa::CorpusStore store = hopqa::CorpusStore::ingest_file(wiki);
    store.save(out);
    std::cout << store.size() << " documents ingested\n";
    return 0;
}

int cmd_build_gold(const RunConfig& cfg, const std::string& dataset, const std::string& db,
                   const std::string& out) {
    const hopqa::CorpusStore corpus = hopqa::CorpusStore::open(db);
    const auto records = hopqa::load_dataset(dataset);
    const auto extractor = make_extractor(cfg, corpus);

    std::filesystem::create_directories(out);
    std::ofstream graphs(std::filesystem::path(out) / "gold_graphs.jsonl");
    std::ofstream samples(std::filesystem::path(out) / "samples.jsonl");
    std::ofstream supervision(std::filesystem::path(out) / "supervision.jsonl");

    json failures = json::array();
    int built = 0, grounded = 0, edges = 0;
    for (const auto& record : records) {
        try {
            const hopqa::GoldBuild gold =
                hopqa::build_gold_graph(record, corpus, cfg.theta_match);
            json jg;
            jg["qid"] = record.id;
            jg["graph"] = gold.graph.to_json();
            jg["answer_grounded"] = gold.answer_grounded;
            graphs << jg.dump() << "\n";

            const hopqa::TrainingSample sample = hopqa::build_task2_sample(
                record, corpus, *extractor, cfg.engine().extractor_config(), cfg.theta_match,
                cfg.seed);
            samples << sample.to_json().dump() << "\n";

            std::vector<hopqa::QuestionRecord> one{record};
            hopqa::export_task1_supervision(one, corpus, cfg.theta_match, supervision);

            ++built;
            grounded += gold.answer_grounded ? 1 : 0;
            edges += gold.graph.edge_count();
        } catch (const std::exception& e) {
            failures.push_back({{"qid", record.id}, {"error", e.what()}});
        }
    }
    json report;
    report["records"] = records.size();
    report["built"] = built;
    report["answer_grounded"] = grounded;
    report["edges_total"] = edges;
    report["failures"] = failures;
    std::ofstream(std::filesystem::path(out) / "report.json") << report.dump(2) << "\n";
    std::cout << built << "/" << records.size() << " gold graphs built, " << failures.size()
              << " failures\n";
    return 0;
}

std::vector<hopqa::TrainingSample> load_samples(const std::string& path) {
    std::filesystem::path p(path);
    if (std::filesystem::is_directory(p)) p /= "samples.jsonl";
    std::ifstream in(p);
    if (!in) throw hopqa::DatasetError("cannot open " + p.string());
    std::vector<hopqa::TrainingSample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        samples.push_back(hopqa::TrainingSample::from_json(json::parse(line)));
    }
    return samples;
}

int cmd_train(const RunConfig& cfg, const std::string& samples_path, const std::string& out) {
    const auto samples = load_samples(samples_path);
    if (!samples.empty()) {
        for (const hopqa::Node& n : samples.front().graph.nodes()) {
            if (n.sem && n.sem->size() != cfg.H) {
                throw hopqa::DatasetError("samples were built with H=" +
                                          std::to_string(n.sem->size()) + ", requested H=" +
                                          std::to_string(cfg.H));
            }
        }
    }
    hopqa::TrainConfig tc;
    tc.hidden = cfg.H;
    tc.gnn_steps = cfg.gnn_steps;
    tc.epochs = cfg.epochs;
    tc.lr = cfg.lr;
    tc.warmup_frac = cfg.warmup_frac;
    tc.seed = cfg.seed;
    const hopqa::TrainResult result = hopqa::train_task2(samples, tc);

    hopqa::save_checkpoint(result.checkpoint, cfg.to_json(), out);
    std::ofstream log(out + ".log.jsonl");
    for (const auto& e : result.log) {
        log << json{{"epoch", e.epoch}, {"loss", e.loss}, {"lr", e.lr}}.dump() << "\n";
    }
    const double acc = hopqa::training_accuracy(samples, result.checkpoint, cfg.gnn_steps);
    std::cout << "trained " << cfg.epochs << " epochs on " << samples.size()
              << " samples; final loss "
              << (result.log.empty() ? 0.0 : result.log.back().loss) << ", train accuracy "
              << acc << "\n";
    return 0;
}

json result_error_json(const hopqa::EngineError& e) {
    return {{"error", std::string(e.code_string())}, {"message", e.what()}};
}

int cmd_answer(const RunConfig& cfg, const std::string& question, const std::string& db,
               const std::string& ckpt_path, const std::string& export_graph, bool relevance) {
    const hopqa::CorpusStore corpus = hopqa::CorpusStore::open(db);
    const hopqa::Checkpoint ckpt = hopqa::load_checkpoint(ckpt_path);
    const auto extractor = make_extractor(cfg, corpus);
    try {
        const hopqa::QAResult result = hopqa::answer_question(
            question, corpus, *extractor, ckpt, cfg.engine(), relevance);
        std::cout << "answer: " << result.answer << "\n";
        std::cout << "type: " << hopqa::to_string(result.question_type) << "\n";
        for (const auto& [title, idx] : result.supporting_facts) {
            std::cout << "fact: " << title << " [" << idx << "]\n";
        }
        if (result.relevance) {
            for (const hopqa::Node& n : result.graph.nodes()) {
                std::cout << "relevance: " << n.name << " " << (*result.relevance)(n.id) << "\n";
            }
        }
        if (!export_graph.empty()) {
            std::ofstream out(export_graph);
            if (std::filesystem::path(export_graph).extension() == ".dot") {
                out << result.graph.to_dot(result.relevance ? &*result.relevance : nullptr);
            } else {
                json jg = result.graph.to_json();
                if (result.relevance) {
                    jg["relevance"] =
                        std::vector<double>(result.relevance->begin(), result.relevance->end());
                }
                out << jg.dump(2) << "\n";
            }
        }
        return 0;
    } catch (const hopqa::EngineError& e) {
        std::cout << result_error_json(e).dump() << "\n";
        return 3;
    }
}

int cmd_predict(const RunConfig& cfg, const std::string& dataset, const std::string& db,
                const std::string& ckpt_path, const std::string& out) {
    const hopqa::CorpusStore corpus = hopqa::CorpusStore::open(db);
    const hopqa::Checkpoint ckpt = hopqa::load_checkpoint(ckpt_path);
    const auto extractor = make_extractor(cfg, corpus);
    const auto records = hopqa::load_dataset(dataset);

    std::vector<std::string> questions;
    questions.reserve(records.size());
    for (const auto& r : records) questions.push_back(r.question);
    const auto items =
        hopqa::answer_batch(questions, corpus, *extractor, ckpt, cfg.engine(), cfg.jobs);

    json pred;
    pred["answer"] = json::object();
    pred["sp"] = json::object();
    int failed = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (items[i].result) {
            pred["answer"][records[i].id] = items[i].result->answer;
            json sp = json::array();
            for (const auto& [title, idx] : items[i].result->supporting_facts) {
                sp.push_back({title, idx});
            }
            pred["sp"][records[i].id] = std::move(sp);
        } else {
            pred["answer"][records[i].id] = "";
            pred["sp"][records[i].id] = json::array();
            std::cerr << "warn: " << records[i].id << ": " << items[i].error << "\n";
            ++failed;
        }
    }
    std::ofstream(out) << pred.dump(2) << "\n";
    std::cout << records.size() - failed << "/" << records.size() << " questions answered\n";
    return 0;
}

int cmd_eval(const std::string& dataset, const std::string& pred_path, const std::string& out) {
    const auto records = hopqa::load_dataset(dataset);
    std::ifstream in(pred_path);
    if (!in) throw hopqa::DatasetError("cannot open " + pred_path);
    json pred;
    in >> pred;
    const hopqa::MetricsReport report = hopqa::evaluate(pred, records);
    const json jr = hopqa::report_to_json(report);
    if (!out.empty()) std::ofstream(out) << jr.dump(2) << "\n";
    std::cout << jr.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-hop question answering over a cognitive graph"};
    app.require_subcommand(1);

    RunConfig cfg;
    // A config file provides defaults; explicit flags win.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string_view(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in) {
                std::cerr << "error: cannot open config " << argv[i + 1] << "\n";
                return 1;
            }
            try {
                json jc;
                in >> jc;
                cfg.apply_json(jc);
            } catch (const std::exception& e) {
                std::cerr << "error: bad config: " << e.what() << "\n";
                return 1;
            }
        }
    }
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values");

    std::string wiki, out_dir, dataset, db, ckpt, question, export_graph, pred_path, out_path,
        samples_path;
    bool relevance = false;

    CLI::App* ingest = app.add_subcommand("ingest", "Build a corpus store from JSONL documents");
    ingest->add_option("--wiki", wiki, "Input JSONL, one document per line")->required();
    ingest->add_option("--out", out_dir, "Output store directory")->required();
    add_common_options(ingest, cfg);

    CLI::App* build_gold =
        app.add_subcommand("build-gold", "Build gold graphs, Task #2 samples and supervision");
    build_gold->add_option("--dataset", dataset, "Dataset JSON")->required();
    build_gold->add_option("--db", db, "Corpus store directory")->required();
    build_gold->add_option("--out", out_dir, "Output directory")->required();
    build_gold->add_option("--extractor", cfg.extractor, "builtin or an http endpoint")
        ->capture_default_str();
    add_common_options(build_gold, cfg);

    CLI::App* train = app.add_subcommand("train", "Train reasoner and predictors (Task #2)");
    train->add_option("--samples", samples_path, "samples.jsonl or its directory")->required();
    train->add_option("--out", ckpt, "Checkpoint output path")->required();
    train->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
    train->add_option("--lr", cfg.lr, "Peak learning rate")->capture_default_str();
    train->add_option("--warmup-frac", cfg.warmup_frac, "Warmup fraction of total steps")
        ->capture_default_str();
    add_common_options(train, cfg);

    CLI::App* answer = app.add_subcommand("answer", "Answer a single question");
    answer->add_option("--question", question, "Question text")->required();
    answer->add_option("--db", db, "Corpus store directory")->required();
    answer->add_option("--ckpt", ckpt, "Checkpoint path")->required();
    answer->add_option("--export-graph", export_graph, "Write the graph (.dot or .json)");
    answer->add_flag("--relevance", relevance, "Compute per-node relevance scores");
    answer->add_option("--extractor", cfg.extractor, "builtin or an http endpoint")
        ->capture_default_str();
    answer->add_option("--max-nodes", cfg.max_nodes, "Graph size cap")->capture_default_str();
    answer->add_option("--max-visits", cfg.max_visits, "Visit cap")->capture_default_str();
    answer->add_option("--update-mode", cfg.update_mode, "batch or async")
        ->capture_default_str();
    add_common_options(answer, cfg);

    CLI::App* predict = app.add_subcommand("predict", "Answer every dataset question");
    predict->add_option("--dataset", dataset, "Dataset JSON")->required();
    predict->add_option("--db", db, "Corpus store directory")->required();
    predict->add_option("--ckpt", ckpt, "Checkpoint path")->required();
    predict->add_option("--out", out_path, "Prediction JSON output")->required();
    predict->add_option("--jobs", cfg.jobs, "Parallel question runs")->capture_default_str();
    predict->add_option("--extractor", cfg.extractor, "builtin or an http endpoint")
        ->capture_default_str();
    predict->add_option("--max-nodes", cfg.max_nodes, "Graph size cap")->capture_default_str();
    predict->add_option("--max-visits", cfg.max_visits, "Visit cap")->capture_default_str();
    predict->add_option("--update-mode", cfg.update_mode, "batch or async")
        ->capture_default_str();
    add_common_options(predict, cfg);

    CLI::App* eval = app.add_subcommand("eval", "Score predictions against a gold dataset");
    eval->add_option("--dataset", dataset, "Gold dataset JSON")->required();
    eval->add_option("--pred", pred_path, "Prediction JSON")->required();
    eval->add_option("--out", out_path, "Report JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(ingest)) {
            echo_config(cfg);
            return cmd_ingest(cfg, wiki, out_dir);
        }
        if (app.got_subcommand(build_gold)) {
            echo_config(cfg);
            return cmd_build_gold(cfg, dataset, db, out_dir);
        }
        if (app.got_subcommand(train)) {
            echo_config(cfg);
            return cmd_train(cfg, samples_path, ckpt);
        }
        if (app.got_subcommand(answer)) {
            echo_config(cfg);
            return cmd_answer(cfg, question, db, ckpt, export_graph, relevance);
        }
        if (app.got_subcommand(predict)) {
            echo_config(cfg);
            return cmd_predict(cfg, dataset, db, ckpt, out_path);
        }
        if (app.got_subcommand(eval)) {
            return cmd_eval(dataset, pred_path, out_path);
        }
    } catch (const hopqa::TrainingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const hopqa::EngineError& e) {
        std::cout << result_error_json(e).dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
