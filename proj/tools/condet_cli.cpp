// condet: train, tune, run and score a lightweight discourse-connective
// detector over token-level corpora (TSV or CoNLL-U).
//
// Exit codes: 0 success, 1 computation failure, 2 usage or input failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "condet/condet.hpp"
#include "condet/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

struct FormatOption {
    std::string value = "auto";

    condet::CorpusFormat resolve(const std::filesystem::path& path) const {
        if (value == "auto") return condet::guess_format(path);
        return *condet::parse_format(value);
    }
};

void add_format_flag(CLI::App* cmd, FormatOption& fmt) {
    cmd->add_option("--format", fmt.value, "Corpus format: auto, tsv or conllu")
        ->check(CLI::IsMember({"auto", "tsv", "conllu"}))
        ->capture_default_str();
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

// Loads inputs with usage-failure semantics: any problem is exit code 2.
template <typename Fn>
int with_inputs(Fn&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

struct HyperparamFlags {
    std::optional<double> learning_rate;
    std::optional<int> max_depth;
    std::optional<int> n_estimators;
    std::optional<double> max_delta_step;
    std::optional<double> min_child_weight;
    std::optional<double> lambda_reg;
    std::optional<double> gamma;
    std::string params_file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--params", params_file,
                        "JSON hyperparameter file (as written by 'tune')");
        cmd->add_option("--learning-rate", learning_rate, "Shrinkage per round");
        cmd->add_option("--max-depth", max_depth, "Maximum tree depth");
        cmd->add_option("--n-estimators", n_estimators, "Boosting rounds");
        cmd->add_option("--max-delta-step", max_delta_step, "Leaf value cap (0 disables)");
        cmd->add_option("--min-child-weight", min_child_weight, "Minimum child hessian mass");
        cmd->add_option("--lambda", lambda_reg, "L2 regularization");
        cmd->add_option("--gamma", gamma, "Minimum gain penalty per split");
    }

    // File values first, then explicit flags on top of the defaults.
    condet::Hyperparams resolve(std::int64_t seed) const {
        condet::Hyperparams hp;
        if (!params_file.empty()) {
            std::ifstream in(params_file);
            if (!in) throw condet::ModelFormatError("cannot open params file: " + params_file);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw condet::ModelFormatError("params file parse error: " +
                                               std::string(e.what()));
            }
            try {
                hp = condet::detail::hyperparams_from_json(j);
            } catch (const nlohmann::json::exception& e) {
                throw condet::ModelFormatError("malformed params file: " +
                                               std::string(e.what()));
            }
        }
        if (learning_rate) hp.learning_rate = *learning_rate;
        if (max_depth) hp.max_depth = *max_depth;
        if (n_estimators) hp.n_estimators = *n_estimators;
        if (max_delta_step) hp.max_delta_step = *max_delta_step;
        if (min_child_weight) hp.min_child_weight = *min_child_weight;
        if (lambda_reg) hp.lambda_reg = *lambda_reg;
        if (gamma) hp.gamma = *gamma;
        hp.seed = seed;
        hp.validate();
        return hp;
    }
};

struct VerbPolicyFlags {
    std::vector<std::string> verb_tags;
    bool include_aux = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--verb-tags", verb_tags,
                        "POS tags treated as verbs (default: VERB)")
            ->delimiter(',');
        cmd->add_flag("--include-aux", include_aux, "Also treat AUX as a verb");
    }

    condet::VerbPolicy resolve() const {
        condet::VerbPolicy policy;
        if (!verb_tags.empty()) policy.verb_tags = verb_tags;
        policy.include_aux = include_aux;
        return policy;
    }
};

int cmd_stats(const std::string& input, const FormatOption& fmt) {
    return with_inputs([&] {
        const auto corpus = condet::load_corpus(input, fmt.resolve(input));
        const auto stats = condet::corpus_stats(corpus);
        std::cout << "documents\t" << corpus.documents.size() << '\n'
                  << "sentences\t" << corpus.sentence_count() << '\n'
                  << "tokens\t" << stats.total() << '\n'
                  << "B-Conn\t" << stats.count_b << '\n'
                  << "I-Conn\t" << stats.count_i << '\n'
                  << "O\t" << stats.count_o << '\n'
                  << "connective_proportion\t" << percent(stats.connective_proportion())
                  << "%\n";
        return kExitOk;
    });
}

int cmd_train(const std::string& input, const std::string& model_out, const FormatOption& fmt,
              const HyperparamFlags& hp_flags, const VerbPolicyFlags& policy_flags,
              bool weighted, std::int64_t seed) {
    condet::Corpus corpus;
    condet::Hyperparams hp;
    const int rc = with_inputs([&] {
        corpus = condet::load_corpus(input, fmt.resolve(input));
        hp = hp_flags.resolve(seed);
        return kExitOk;
    });
    if (rc != kExitOk) return rc;
    try {
        condet::TrainingTrace trace;
        const auto model =
            condet::fit_model(corpus, hp, weighted, policy_flags.resolve(), &trace);
        condet::save_model(model, model_out);
        std::cout << "rounds\t" << model.booster.rounds.size() << '\n'
                  << "final_training_loss\t" << trace.round_loss.back() << '\n'
                  << "model\t" << model_out << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "training failed: " << e.what() << '\n';
        return kExitComputation;
    }
}

int cmd_tune(const std::string& input, const FormatOption& fmt, const std::string& grid_file,
             const std::string& out_file, int k, bool weighted, std::int64_t seed,
             const VerbPolicyFlags& policy_flags) {
    condet::Corpus corpus;
    condet::ParamGrid grid;
    const int rc = with_inputs([&] {
        corpus = condet::load_corpus(input, fmt.resolve(input));
        if (!grid_file.empty()) {
            std::ifstream in(grid_file);
            if (!in) throw condet::ModelFormatError("cannot open grid file: " + grid_file);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw condet::ModelFormatError("grid file parse error: " +
                                               std::string(e.what()));
            }
            if (j.contains("learning_rate")) grid.learning_rate = j["learning_rate"].get<std::vector<double>>();
            if (j.contains("max_depth")) grid.max_depth = j["max_depth"].get<std::vector<int>>();
            if (j.contains("n_estimators")) grid.n_estimators = j["n_estimators"].get<std::vector<int>>();
            if (j.contains("max_delta_step")) grid.max_delta_step = j["max_delta_step"].get<std::vector<double>>();
            if (j.contains("min_child_weight")) grid.min_child_weight = j["min_child_weight"].get<std::vector<double>>();
        }
        return kExitOk;
    });
    if (rc != kExitOk) return rc;

    condet::GridSearchResult result;
    try {
        result = condet::grid_search(corpus, grid, k, weighted, seed, policy_flags.resolve(),
                                     condet::threads_from_env());
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "tuning failed: " << e.what() << '\n';
        return kExitComputation;
    }

    std::cout << "learning_rate\tmax_depth\tn_estimators\tmax_delta_step\tmin_child_weight"
                 "\tmean_f1\trank\tfold_f1\n";
    for (const auto& cv : result.results) {
        std::cout << format_double(cv.params.learning_rate) << '\t' << cv.params.max_depth
                  << '\t' << cv.params.n_estimators << '\t'
                  << format_double(cv.params.max_delta_step) << '\t'
                  << format_double(cv.params.min_child_weight) << '\t' << percent(cv.mean_f1)
                  << '\t' << cv.rank << '\t';
        for (std::size_t f = 0; f < cv.fold_f1.size(); ++f) {
            if (f) std::cout << ',';
            std::cout << percent(cv.fold_f1[f]);
        }
        std::cout << '\n';
    }
    std::cout << "selected\tlearning_rate=" << format_double(result.best.learning_rate)
              << " max_depth=" << result.best.max_depth
              << " n_estimators=" << result.best.n_estimators
              << " max_delta_step=" << format_double(result.best.max_delta_step)
              << " min_child_weight=" << format_double(result.best.min_child_weight) << '\n';

    try {
        std::ofstream out(out_file);
        if (!out) throw std::runtime_error("cannot open output file: " + out_file);
        out << condet::detail::hyperparams_to_json(result.best).dump(1) << '\n';
        std::cout << "params_file\t" << out_file << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitComputation;
    }
}

int cmd_predict(const std::string& model_file, const std::string& input,
                const std::string& output, const FormatOption& fmt, bool timed, int reps) {
    condet::GbdtModel model;
    condet::Corpus corpus;
    condet::CorpusFormat format{};
    const int rc = with_inputs([&] {
        model = condet::load_model(model_file);
        condet::check_schema(model);
        format = fmt.resolve(input);
        corpus = condet::load_corpus(input, format);
        return kExitOk;
    });
    if (rc != kExitOk) return rc;
    try {
        const auto predictions = condet::predict_labels(model, corpus);
        condet::write_predictions(corpus, predictions, output, format);
        if (timed) {
            const auto timing = condet::time_inference(model, corpus, reps);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f", timing.seconds);
            std::cout << "inference_seconds\t" << buf << '\n'
                      << "tokens_per_second\t" << format_double(timing.tokens_per_second)
                      << '\n';
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "prediction failed: " << e.what() << '\n';
        return kExitComputation;
    }
}

// Gold and predicted corpora must align token for token.
int check_alignment(const condet::Corpus& gold, const condet::Corpus& pred) {
    if (gold.token_count() != pred.token_count()) {
        std::cerr << "error: gold and prediction files differ in token count\n";
        return kExitUsage;
    }
    return kExitOk;
}

int cmd_score(const std::string& gold_file, const std::string& pred_file,
              const FormatOption& fmt) {
    return with_inputs([&] {
        const auto gold = condet::load_corpus(gold_file, fmt.resolve(gold_file));
        const auto pred = condet::load_corpus(pred_file, fmt.resolve(pred_file));
        if (const int rc = check_alignment(gold, pred); rc != kExitOk) return rc;
        const auto report = condet::score_corpus(gold, gold.labels(), pred.labels());
        std::cout << "tp\t" << report.tp << '\n'
                  << "fp\t" << report.fp << '\n'
                  << "fn\t" << report.fn << '\n'
                  << "precision\t" << percent(report.precision()) << '\n'
                  << "recall\t" << percent(report.recall()) << '\n'
                  << "f1\t" << percent(report.f1()) << '\n';
        return kExitOk;
    });
}

int cmd_report(const std::string& gold_file, const std::string& pred_file,
               const FormatOption& fmt, std::size_t limit) {
    return with_inputs([&] {
        const auto gold = condet::load_corpus(gold_file, fmt.resolve(gold_file));
        const auto pred = condet::load_corpus(pred_file, fmt.resolve(pred_file));
        if (const int rc = check_alignment(gold, pred); rc != kExitOk) return rc;
        const auto rows = condet::error_report(gold, gold.labels(), pred.labels());
        std::cout << "connective\ttp\ttn\tfp\tfn\taccuracy\n";
        std::size_t emitted = 0;
        for (const auto& row : rows) {
            if (limit && emitted++ >= limit) break;
            std::cout << row.form << '\t' << row.tp << '\t' << row.tn << '\t' << row.fp << '\t'
                      << row.fn << '\t' << percent(row.accuracy()) << '\n';
        }
        return kExitOk;
    });
}

int cmd_importance(const std::string& model_file, const std::string& kind_name) {
    condet::GbdtModel model;
    const int rc = with_inputs([&] {
        model = condet::load_model(model_file);
        return kExitOk;
    });
    if (rc != kExitOk) return rc;
    try {
        const auto kind = condet::parse_importance_kind(kind_name);
        const auto ranking = condet::feature_importance(model.booster, *kind);
        std::cout << "feature\timportance\n";
        for (const auto& [name, value] : ranking)
            std::cout << name << '\t' << format_double(value) << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitComputation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lightweight discourse-connective detector"};
    app.require_subcommand(1);

    // stats
    auto* stats = app.add_subcommand("stats", "Label distribution of a corpus");
    std::string stats_input;
    FormatOption stats_fmt;
    stats->add_option("input", stats_input, "Corpus file")->required();
    add_format_flag(stats, stats_fmt);

    // train
    auto* train = app.add_subcommand("train", "Train a detector");
    std::string train_input, train_model_out = "model.json";
    FormatOption train_fmt;
    HyperparamFlags train_hp;
    VerbPolicyFlags train_policy;
    bool train_weighted = false;
    std::int64_t train_seed = 0;
    train->add_option("input", train_input, "Training corpus")->required();
    train->add_option("--model-out", train_model_out, "Model file to write")
        ->capture_default_str();
    add_format_flag(train, train_fmt);
    train_hp.attach(train);
    train_policy.attach(train);
    train->add_flag("--weighted", train_weighted, "Inverse-frequency class weighting");
    train->add_option("--seed", train_seed, "Random seed")->capture_default_str();

    // tune
    auto* tune = app.add_subcommand("tune", "Grid search with k-fold cross-validation");
    std::string tune_input, tune_grid, tune_out = "best_params.json";
    FormatOption tune_fmt;
    VerbPolicyFlags tune_policy;
    int tune_k = 3;
    bool tune_weighted = false;
    std::int64_t tune_seed = 0;
    tune->add_option("input", tune_input, "Training corpus")->required();
    tune->add_option("--grid", tune_grid, "JSON grid file (candidate lists per parameter)");
    tune->add_option("--out", tune_out, "Winning parameters file")->capture_default_str();
    tune->add_option("-k,--folds", tune_k, "Cross-validation folds")->capture_default_str();
    tune->add_flag("--weighted", tune_weighted, "Inverse-frequency class weighting");
    tune->add_option("--seed", tune_seed, "Random seed")->capture_default_str();
    add_format_flag(tune, tune_fmt);
    tune_policy.attach(tune);

    // predict
    auto* predict = app.add_subcommand("predict", "Label a corpus with a trained model");
    std::string predict_model, predict_input, predict_output;
    FormatOption predict_fmt;
    bool predict_time = false;
    int predict_reps = 5;
    predict->add_option("--model", predict_model, "Model file")->required();
    predict->add_option("input", predict_input, "Corpus to label")->required();
    predict->add_option("output", predict_output, "Predictions file to write")->required();
    add_format_flag(predict, predict_fmt);
    predict->add_flag("--time", predict_time, "Measure inference speed");
    predict->add_option("--reps", predict_reps, "Timing repetitions")->capture_default_str();

    // score
    auto* score = app.add_subcommand("score", "Exact-span precision/recall/F1");
    std::string score_gold, score_pred;
    FormatOption score_fmt;
    score->add_option("gold", score_gold, "Gold corpus")->required();
    score->add_option("pred", score_pred, "Predicted corpus")->required();
    add_format_flag(score, score_fmt);

    // report
    auto* report = app.add_subcommand("report", "Per-connective error statistics");
    std::string report_gold, report_pred;
    FormatOption report_fmt;
    std::size_t report_limit = 0;
    report->add_option("gold", report_gold, "Gold corpus")->required();
    report->add_option("pred", report_pred, "Predicted corpus")->required();
    report->add_option("--limit", report_limit, "Emit at most this many rows (0 = all)")
        ->capture_default_str();
    add_format_flag(report, report_fmt);

    // importance
    auto* importance = app.add_subcommand("importance", "Ranked feature importances");
    std::string importance_model, importance_kind = "gain";
    importance->add_option("--model", importance_model, "Model file")->required();
    importance->add_option("--kind", importance_kind, "gain or split_count")
        ->check(CLI::IsMember({"gain", "split_count"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    if (stats->parsed()) return cmd_stats(stats_input, stats_fmt);
    if (train->parsed())
        return cmd_train(train_input, train_model_out, train_fmt, train_hp, train_policy,
                         train_weighted, train_seed);
    if (tune->parsed())
        return cmd_tune(tune_input, tune_fmt, tune_grid, tune_out, tune_k, tune_weighted,
                        tune_seed, tune_policy);
    if (predict->parsed())
        return cmd_predict(predict_model, predict_input, predict_output, predict_fmt,
                           predict_time, predict_reps);
    if (score->parsed()) return cmd_score(score_gold, score_pred, score_fmt);
    if (report->parsed()) return cmd_report(report_gold, report_pred, report_fmt, report_limit);
    if (importance->parsed()) return cmd_importance(importance_model, importance_kind);
    return kExitUsage;
}
