/**
 * @file
 * @brief Command-line interface: training, evaluation and introspection.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pine/error.h"
#include "pine/eval.h"
#include "pine/init.h"
#include "pine/model_io.h"
#include "pine/trainer.h"

namespace {

using nlohmann::json;
using namespace pine;

struct GlobalOptions {
    int threads = 1;
    std::uint64_t seed = 1;
    std::string model;
    std::string format = "json";
    std::string output;  // empty = stdout
};

void emit(const GlobalOptions& g, const json& report, const std::string& csv) {
    const std::string text =
        g.format == "csv" && !csv.empty() ? csv : report.dump(2) + "\n";
    if (g.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(g.output);
        if (!out) {
            throw DataError("cannot open for writing: " + g.output);
        }
        out << text;
    }
}

ModelBundle load_required_model(const GlobalOptions& g) {
    if (g.model.empty()) {
        throw std::invalid_argument("--model is required for this command");
    }
    return load_model(g.model);
}

json log_to_json(const TrainingLog& log) {
    return json{{"loss_per_percent", log.loss_per_percent},
                {"steps_per_percent", log.steps_per_percent},
                {"vocab_seconds", log.vocab_seconds},
                {"train_seconds", log.train_seconds},
                {"raw_tokens", log.raw_tokens},
                {"trained_steps", log.trained_steps},
                {"threads", log.threads},
                {"first_decile_mean_loss", log.mean_loss(0, 9)},
                {"last_decile_mean_loss", log.mean_loss(90, 99)}};
}

struct TrainCli {
    TrainConfig cfg;
    std::string kind = "subword";
    std::string window_mode;
    std::string init_scheme = "sqrt-normal";
    std::string input;
    std::string output;
    std::string log_path;
    std::int32_t window = 0;

    TrainConfig resolve(const GlobalOptions& g) {
        cfg.kind = model_kind_from_string(kind);
        cfg.window = window;
        if (!window_mode.empty()) {
            cfg.window_mode = window_mode_from_string(window_mode);
        }
        cfg.init_scheme = init_scheme_from_string(init_scheme);
        cfg.threads = g.threads;
        cfg.seed = g.seed;
        return cfg;
    }
};

int run_train(const GlobalOptions& g, TrainCli& cli) {
    const TrainConfig cfg = cli.resolve(g);
    const TrainResult result = train(cli.input, cfg);
    save_model(result.model, cli.output);
    json report{{"model", cli.output},
                {"kind", to_string(cfg.kind)},
                {"vocab_size", result.model.vocab.size()},
                {"total_tokens", result.model.vocab.total_tokens()},
                {"log", log_to_json(result.log)}};
    if (!cli.log_path.empty()) {
        std::ofstream out(cli.log_path);
        if (!out) {
            throw DataError("cannot open for writing: " + cli.log_path);
        }
        out << log_to_json(result.log).dump(2) << "\n";
    }
    emit(g, report, "");
    return 0;
}

int run_analogy(const GlobalOptions& g, const std::string& questions_path,
                std::int32_t top_k) {
    const auto model = load_required_model(g);
    const auto questions = load_analogy_file(questions_path);
    const auto report = evaluate_analogies(model, questions, top_k);
    emit(g,
         json{{"questions", questions_path},
              {"total", report.total},
              {"skipped_oov", report.skipped},
              {"correct", report.correct},
              {"accuracy", report.accuracy}},
         "");
    return 0;
}

int run_predict(const GlobalOptions& g, const std::string& sentence,
                const std::string& mask, int top) {
    const auto model = load_required_model(g);
    const auto at = sentence.find(mask);
    if (at == std::string::npos) {
        throw DataError("mask token \"" + mask + "\" not found in the input");
    }
    const auto left = tokenize(sentence.substr(0, at));
    const auto right = tokenize(sentence.substr(at + mask.size()));
    const auto ranking = rank_masked_predictions(model, left, right);
    json rows = json::array();
    std::string csv = "rank,word,score,probability\n";
    const auto limit = std::min<std::size_t>(
        ranking.size(), top > 0 ? static_cast<std::size_t>(top) : ranking.size());
    for (std::size_t i = 0; i < limit; ++i) {
        const auto& r = ranking[i];
        const auto& word = model.vocab.entry(r.word).word;
        rows.push_back({{"rank", i + 1},
                        {"word", word},
                        {"score", r.score},
                        {"probability", r.probability}});
        csv += std::to_string(i + 1) + "," + word + "," +
               std::to_string(r.score) + "," + std::to_string(r.probability) +
               "\n";
    }
    emit(g, json{{"context", sentence}, {"predictions", rows}}, csv);
    return 0;
}

int run_positions(const GlobalOptions& g, int clusters) {
    const auto model = load_required_model(g);
    const auto importance = position_importance(model.params);
    json rows = json::array();
    std::string csv = "position,norm,scaled\n";
    for (const auto& imp : importance) {
        rows.push_back({{"position", imp.position},
                        {"norm", imp.norm},
                        {"scaled", imp.scaled}});
        csv += std::to_string(imp.position) + "," + std::to_string(imp.norm) +
               "," + std::to_string(imp.scaled) + "\n";
    }
    json report{{"kind", to_string(model.params.kind)},
                {"positions", rows}};
    if (clusters > 0) {
        const auto clustering =
            cluster_positional_features(model.params, clusters, g.seed);
        json cluster_rows = json::array();
        csv += "\ncluster,size";
        for (const auto& imp : importance) {
            csv += ",p" + std::to_string(imp.position);
        }
        csv += "\n";
        for (int c = 0; c < clustering.k; ++c) {
            cluster_rows.push_back(
                {{"cluster", c},
                 {"size", clustering.sizes[static_cast<std::size_t>(c)]},
                 {"curve", clustering.curves[static_cast<std::size_t>(c)]}});
            csv += std::to_string(c) + "," +
                   std::to_string(clustering.sizes[static_cast<std::size_t>(c)]);
            for (const auto x : clustering.curves[static_cast<std::size_t>(c)]) {
                csv += "," + std::to_string(x);
            }
            csv += "\n";
        }
        report["clusters"] = cluster_rows;
    }
    emit(g, report, csv);
    return 0;
}

int run_words(const GlobalOptions& g, std::vector<std::string> words,
              const std::string& words_file, int clusters, int top) {
    const auto model = load_required_model(g);
    if (!words_file.empty()) {
        std::ifstream in(words_file);
        if (!in) {
            throw DataError("cannot open word list: " + words_file);
        }
        std::string w;
        while (in >> w) {
            words.push_back(lowercase(w));
        }
    }
    if (words.empty()) {
        // Default: the most frequent vocabulary words.
        const auto limit = std::min<std::int32_t>(model.vocab.size(), 200);
        for (std::int32_t i = 0; i < limit; ++i) {
            words.push_back(model.vocab.entry(i).word);
        }
    }
    const auto clustering =
        cluster_positional_features(model.params, clusters, g.seed);
    const auto importance = context_word_importance(model, clustering, words);

    json rows = json::array();
    for (const auto& wi : importance) {
        rows.push_back({{"word", wi.word},
                        {"per_cluster", wi.per_cluster},
                        {"best_cluster", wi.best_cluster}});
    }
    // Per-cluster top-m words by importance.
    json top_rows = json::array();
    std::string csv = "cluster,rank,word,importance\n";
    for (int c = 0; c < clustering.k; ++c) {
        std::vector<const WordImportance*> attributed;
        for (const auto& wi : importance) {
            if (wi.best_cluster == c) {
                attributed.push_back(&wi);
            }
        }
        std::sort(attributed.begin(), attributed.end(),
                  [c](const WordImportance* a, const WordImportance* b) {
                      return a->per_cluster[static_cast<std::size_t>(c)] >
                             b->per_cluster[static_cast<std::size_t>(c)];
                  });
        json cluster_top = json::array();
        const auto limit =
            std::min<std::size_t>(attributed.size(), static_cast<std::size_t>(top));
        for (std::size_t i = 0; i < limit; ++i) {
            cluster_top.push_back(attributed[i]->word);
            csv += std::to_string(c) + "," + std::to_string(i + 1) + "," +
                   attributed[i]->word + "," +
                   std::to_string(
                       attributed[i]->per_cluster[static_cast<std::size_t>(c)]) +
                   "\n";
        }
        top_rows.push_back({{"cluster", c},
                            {"size", clustering.sizes[static_cast<std::size_t>(c)]},
                            {"top_words", cluster_top}});
    }
    emit(g, json{{"words", rows}, {"clusters", top_rows}}, csv);
    return 0;
}

int run_bounds(const GlobalOptions& g, std::int64_t trials) {
    const auto model = load_required_model(g);
    const auto report = check_score_bounds(model, trials, g.seed);
    const bool ok = report.norm_bound_violations == 0 &&
                    report.cluster_bound_violations == 0 &&
                    report.diff_bound_holds;
    emit(g,
         json{{"trials", report.trials},
              {"norm_bound_violations", report.norm_bound_violations},
              {"cluster_bound_violations", report.cluster_bound_violations},
              {"diff_measured_mean", report.diff_measured_mean},
              {"diff_rhs_mean", report.diff_rhs_mean},
              {"diff_bound_holds", report.diff_bound_holds},
              {"diff_loose_bound", report.diff_loose_bound},
              {"ok", ok}},
         "");
    if (!ok) {
        throw NumericError("score bound violated; parameters are suspect");
    }
    return 0;
}

int run_init_stats(const GlobalOptions& g, const std::string& scheme,
                   std::int32_t dim, int k, std::int64_t samples) {
    const auto report = estimate_product_moments(
        init_scheme_from_string(scheme), dim, k, samples, g.seed, g.threads);
    emit(g,
         json{{"scheme", scheme},
              {"dim", dim},
              {"k", k},
              {"samples", report.samples},
              {"mean", report.mean},
              {"mean_stderr", report.mean_stderr},
              {"variance", report.variance},
              {"variance_ratio", report.variance_ratio},
              {"target_variance", 1.0 / (3.0 * dim * dim)}},
         "");
    return 0;
}

struct SweepCli {
    std::string input;
    std::string kind = "constrained";
    std::vector<std::int32_t> windows{5, 10, 15};
    std::vector<std::int32_t> pos_dims{60};
    std::string questions;
    std::int32_t dim = 300;
    std::int32_t epochs = 1;
    std::int32_t buckets = 2'000'000;
    std::int32_t min_count = 5;
    double sample = 1e-5;
};

int run_sweep(const GlobalOptions& g, const SweepCli& cli) {
    const auto kind = model_kind_from_string(cli.kind);
    std::vector<std::int32_t> pos_dims = cli.pos_dims;
    if (kind != ModelKind::kConstrained) {
        pos_dims = {0};  // D' is tied to the kind elsewhere
    }
    json rows = json::array();
    std::string csv = "kind,window,dprime,train_seconds,last_decile_mean_loss";
    if (!cli.questions.empty()) {
        csv += ",analogy_accuracy";
    }
    csv += "\n";
    for (const auto window : cli.windows) {
        for (const auto pos_dim : pos_dims) {
            TrainConfig cfg;
            cfg.kind = kind;
            cfg.window = window;
            cfg.dim = cli.dim;
            if (kind == ModelKind::kConstrained) {
                cfg.pos_dim = pos_dim;
            }
            cfg.epochs = cli.epochs;
            cfg.buckets = cli.buckets;
            cfg.min_count = cli.min_count;
            cfg.sample = cli.sample;
            cfg.threads = g.threads;
            cfg.seed = g.seed;
            const auto result = train(cli.input, cfg);
            json row{{"kind", cli.kind},
                     {"window", window},
                     {"dprime", cfg.kind == ModelKind::kConstrained ? pos_dim
                                                                    : cli.dim},
                     {"train_seconds", result.log.train_seconds},
                     {"last_decile_mean_loss", result.log.mean_loss(90, 99)}};
            csv += cli.kind + "," + std::to_string(window) + "," +
                   std::to_string(pos_dim) + "," +
                   std::to_string(result.log.train_seconds) + "," +
                   std::to_string(result.log.mean_loss(90, 99));
            if (!cli.questions.empty()) {
                const auto questions = load_analogy_file(cli.questions);
                const auto report = evaluate_analogies(result.model, questions);
                row["analogy_accuracy"] = report.accuracy;
                csv += "," + std::to_string(report.accuracy);
            }
            csv += "\n";
            rows.push_back(std::move(row));
        }
    }
    emit(g, json{{"sweep", rows}}, csv);
    return 0;
}

int run_export(const GlobalOptions& g, const std::string& output) {
    const auto model = load_required_model(g);
    export_text_vectors(model, output);
    emit(g, json{{"exported", output}, {"words", model.vocab.size()}}, "");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shallow log-bilinear word embeddings with positional weighting"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--model", g.model, "Model file (.pine)");
    app.add_option("--format", g.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--output-file", g.output, "Write the report here instead of stdout");

    TrainCli train_cli;
    auto* train_cmd = app.add_subcommand("train", "Train a model on a text corpus");
    train_cmd->add_option("--input", train_cli.input, "Corpus file (UTF-8 text)")
        ->required();
    train_cmd->add_option("--output", train_cli.output, "Model file to write")
        ->required();
    train_cmd->add_option("--kind", train_cli.kind, "Model kind")
        ->check(CLI::IsMember({"subword", "positional", "constrained"}));
    train_cmd->add_option("--window", train_cli.window,
                          "Context window c (0 = kind default)");
    train_cmd->add_option("--dim", train_cli.cfg.dim, "Feature count D");
    train_cmd->add_option("--dprime", train_cli.cfg.pos_dim,
                          "Positional features D' (constrained kind)");
    train_cmd->add_option("--epochs", train_cli.cfg.epochs, "Training epochs");
    train_cmd->add_option("--lr", train_cli.cfg.lr0, "Initial learning rate");
    train_cmd->add_option("--negatives", train_cli.cfg.negatives,
                          "Negative samples per step");
    train_cmd->add_option("--min-count", train_cli.cfg.min_count,
                          "Discard words seen fewer times");
    train_cmd->add_option("--sample", train_cli.cfg.sample,
                          "Subsampling low-pass threshold r");
    train_cmd->add_option("--buckets", train_cli.cfg.buckets,
                          "Subword hash buckets");
    train_cmd->add_option("--minn", train_cli.cfg.minn, "Smallest n-gram length");
    train_cmd->add_option("--maxn", train_cli.cfg.maxn, "Largest n-gram length");
    train_cmd->add_option("--window-mode", train_cli.window_mode,
                          "fixed or uniform-shrink (default depends on kind)")
        ->check(CLI::IsMember({"fixed", "uniform-shrink"}));
    train_cmd->add_option("--init-scheme", train_cli.init_scheme,
                          "Initialization scheme for positional kinds")
        ->check(CLI::IsMember({"sqrt-normal", "uniform-both", "uniform-ones"}));
    train_cmd->add_flag("--positional-lock", train_cli.cfg.positional_lock,
                        "Serialize positional-vector updates across threads");
    train_cmd->add_option("--log", train_cli.log_path,
                          "Write the training log JSON here");

    std::string questions_path;
    std::int32_t top_k_vocab = 200'000;
    auto* analogy_cmd =
        app.add_subcommand("analogy", "Word-analogy accuracy of a model");
    analogy_cmd->add_option("--questions", questions_path, "Analogy question file")
        ->required();
    analogy_cmd->add_option("--topk-vocab", top_k_vocab,
                            "Restrict candidates to the most frequent words");

    std::string sentence;
    std::string mask = "<mask>";
    int top_predictions = 10;
    auto* predict_cmd =
        app.add_subcommand("predict", "Rank vocabulary words for a masked slot");
    predict_cmd->add_option("sentence", sentence, "Sentence containing the mask")
        ->required();
    predict_cmd->add_option("--mask", mask, "Mask marker inside the sentence");
    predict_cmd->add_option("--top", top_predictions,
                            "How many predictions to print (0 = all)");

    int clusters = 3;
    auto* positions_cmd = app.add_subcommand(
        "positions", "Positional importance and feature clusters");
    positions_cmd->add_option("--clusters", clusters,
                              "Feature clusters (0 = skip clustering)");

    std::vector<std::string> word_args;
    std::string words_file;
    int words_clusters = 3;
    int words_top = 10;
    auto* words_cmd = app.add_subcommand(
        "words", "Context-word importance per feature cluster");
    words_cmd->add_option("words", word_args, "Words to analyse");
    words_cmd->add_option("--words-file", words_file, "File with one word per line");
    words_cmd->add_option("--clusters", words_clusters, "Feature clusters");
    words_cmd->add_option("--top", words_top, "Top words listed per cluster");

    std::int64_t trials = 1000;
    auto* bounds_cmd =
        app.add_subcommand("bounds", "Numeric verification of the score bounds");
    bounds_cmd->add_option("--trials", trials, "Randomized trials");

    std::string stats_scheme = "sqrt-normal";
    std::int32_t stats_dim = 300;
    int stats_k = kDefaultSqrtNormalDepth;
    std::int64_t stats_samples = 10'000'000;
    auto* stats_cmd = app.add_subcommand(
        "init-stats", "Monte-Carlo moments of an initialization scheme");
    stats_cmd->add_option("--scheme", stats_scheme, "Scheme")
        ->check(CLI::IsMember({"sqrt-normal", "uniform-both", "uniform-ones"}));
    stats_cmd->add_option("--dim", stats_dim, "Feature count D");
    stats_cmd->add_option("--k", stats_k, "Series truncation depth");
    stats_cmd->add_option("--samples", stats_samples, "Sample pairs");

    SweepCli sweep_cli;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Grid sweep over window sizes and D'");
    sweep_cmd->add_option("--input", sweep_cli.input, "Corpus file")->required();
    sweep_cmd->add_option("--kind", sweep_cli.kind, "Model kind")
        ->check(CLI::IsMember({"subword", "positional", "constrained"}));
    sweep_cmd->add_option("--windows", sweep_cli.windows, "Window sizes to try")
        ->delimiter(',');
    sweep_cmd->add_option("--dprimes", sweep_cli.pos_dims, "D' values to try")
        ->delimiter(',');
    sweep_cmd->add_option("--questions", sweep_cli.questions,
                          "Analogy file scored after each run");
    sweep_cmd->add_option("--dim", sweep_cli.dim, "Feature count D");
    sweep_cmd->add_option("--epochs", sweep_cli.epochs, "Epochs per run");
    sweep_cmd->add_option("--buckets", sweep_cli.buckets, "Subword hash buckets");
    sweep_cmd->add_option("--min-count", sweep_cli.min_count, "Min word count");
    sweep_cmd->add_option("--sample", sweep_cli.sample, "Subsampling threshold");

    std::string export_output;
    auto* export_cmd =
        app.add_subcommand("export", "Write word vectors in text format");
    export_cmd->add_option("--output", export_output, "Text vector file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (train_cmd->parsed()) {
            return run_train(g, train_cli);
        }
        if (analogy_cmd->parsed()) {
            return run_analogy(g, questions_path, top_k_vocab);
        }
        if (predict_cmd->parsed()) {
            return run_predict(g, sentence, mask, top_predictions);
        }
        if (positions_cmd->parsed()) {
            return run_positions(g, clusters);
        }
        if (words_cmd->parsed()) {
            return run_words(g, word_args, words_file, words_clusters, words_top);
        }
        if (bounds_cmd->parsed()) {
            return run_bounds(g, trials);
        }
        if (stats_cmd->parsed()) {
            return run_init_stats(g, stats_scheme, stats_dim, stats_k,
                                  stats_samples);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep(g, sweep_cli);
        }
        if (export_cmd->parsed()) {
            return run_export(g, export_output);
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
