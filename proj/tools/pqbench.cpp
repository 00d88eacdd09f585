// pqbench: synthesize power-quality event datasets, extract wavelet
// features, train classifiers, and benchmark them.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pqbench/dataio.hpp"
#include "pqbench/eval.hpp"
#include "pqbench/features.hpp"
#include "pqbench/models.hpp"
#include "pqbench/parallel.hpp"
#include "pqbench/rng.hpp"
#include "pqbench/synth.hpp"

namespace fs = std::filesystem;
using namespace pqbench;

namespace {

// The train and test splits draw from distinct derived streams even when
// the user passes the same seed.
std::uint64_t split_master_seed(std::uint64_t seed, const std::string& split) {
    return derive_seed(seed, split == "test" ? 1 : 0, 0x70716265ull);
}

struct HyperFlags {
    models::Hyper hyper;

    void attach(CLI::App* cmd) {
        cmd->add_option("--svm-c", hyper.svm_c, "SVM box constraint");
        cmd->add_option("--svm-gamma", hyper.svm_gamma,
                        "SVM kernel scale (0 = 1/d)");
        cmd->add_option("--svm-tol", hyper.svm_tol, "SMO KKT tolerance");
        cmd->add_option("--gbt-rounds", hyper.gbt_rounds, "boosting rounds");
        cmd->add_option("--gbt-eta", hyper.gbt_eta, "boosting learning rate");
        cmd->add_option("--gbt-lambda", hyper.gbt_lambda, "leaf L2 penalty");
        cmd->add_option("--gbt-max-depth", hyper.gbt_max_depth,
                        "boosted tree depth");
        cmd->add_option("--logreg-lambda", hyper.logreg_lambda,
                        "logistic regression L2 penalty");
        cmd->add_option("--knn-k", hyper.knn_k, "KNN neighbor count");
        cmd->add_option("--cart-max-depth", hyper.cart_max_depth,
                        "decision tree depth cap (0 = unlimited)");
        cmd->add_option("--forest-trees", hyper.forest_trees,
                        "random forest tree count");
    }
};

models::Dataset load_feature_csv(const std::string& path,
                                 std::uint64_t* digest) {
    const std::string text = dataio::read_text(path);
    if (digest) *digest = eval::fnv1a64(text);
    // reparse through the validated reader
    const auto rows = dataio::read_features(path);
    return models::dataset_from_features(rows);
}

int run_synth(const std::string& out_dir, int per_class,
              const std::string& split, std::uint64_t seed) {
    synth::CircuitConfig config;
    const std::uint64_t master = split_master_seed(seed, split);
    const auto records = synth::generate_dataset(config, master, per_class);
    const std::string manifest = dataio::write_dataset(records, out_dir, split);
    std::cout << "wrote " << records.size() << " records to " << manifest
              << "\n";
    return 0;
}

int run_features(const std::string& dataset_dir, const std::string& out_path) {
    const auto records = dataio::read_dataset(dataset_dir);
    std::vector<features::FeatureVector> rows(records.size());
    parallel_for(static_cast<int>(records.size()), [&](int i) {
        rows[i] = features::extract_features(records[i]);
    });
    dataio::write_features(rows, out_path);
    std::cout << "wrote " << rows.size() << " feature rows to " << out_path
              << "\n";
    return 0;
}

int run_train(const std::string& model_name, const std::string& train_path,
              const std::string& out_path, const models::Hyper& hyper,
              std::uint64_t seed) {
    models::ModelSpec spec;
    spec.kind = models::kind_from_name(model_name);
    spec.hyper = hyper;
    spec.seed = seed;
    const models::Dataset train_set = load_feature_csv(train_path, nullptr);
    const models::TrainedModel model = models::train(spec, train_set);
    dataio::write_model(model, out_path);
    std::cout << "trained " << model_name << " on " << train_set.size()
              << " samples -> " << out_path << "\n";
    return 0;
}

int run_eval(const std::string& model_path, const std::string& test_path,
             const std::string& report_path, const std::string& heatmap_path) {
    const models::TrainedModel model = dataio::read_model(model_path);
    std::uint64_t digest = 0;
    const models::Dataset test_set = load_feature_csv(test_path, &digest);
    const std::vector<int> pred = models::predict_batch(model, test_set.x);

    eval::EvalReport report;
    report.model_name = models::kind_name(model.spec.kind);
    report.test_digest = digest;
    report.confusion = eval::confusion(test_set.y, pred);
    eval::fill_metrics(report);
    dataio::write_report(report, report_path);
    if (!heatmap_path.empty()) {
        const auto& names = synth::class_names();
        dataio::write_text_atomic(
            heatmap_path,
            eval::render_heatmap_svg(
                report.confusion,
                std::vector<std::string>(names.begin(), names.end())));
    }
    std::cout << report.model_name << " accuracy "
              << dataio::format_double(report.accuracy) << "\n";
    return 0;
}

int run_benchmark(const std::string& train_path, const std::string& test_path,
                  const std::string& out_path, const std::string& reports_dir,
                  const std::vector<std::string>& model_names,
                  const models::Hyper& hyper, std::uint64_t seed) {
    std::uint64_t train_digest = 0, test_digest = 0;
    const models::Dataset train_set = load_feature_csv(train_path, &train_digest);
    const models::Dataset test_set = load_feature_csv(test_path, &test_digest);

    std::vector<models::ModelSpec> specs;
    if (model_names.empty()) {
        for (models::ModelKind kind : models::all_kinds()) {
            specs.push_back({kind, hyper, seed});
        }
    } else {
        for (const auto& name : model_names) {
            specs.push_back({models::kind_from_name(name), hyper, seed});
        }
    }

    const eval::Leaderboard board =
        eval::benchmark(train_set, test_set, specs, train_digest, test_digest);
    dataio::write_text_atomic(out_path, dataio::leaderboard_csv(board));

    if (!reports_dir.empty()) {
        fs::create_directories(reports_dir);
        for (const auto& r : board.reports) {
            dataio::write_report(
                r, (fs::path(reports_dir) / (r.model_name + ".json")).string());
        }
        // heatmap of the best model
        for (const auto& r : board.reports) {
            if (!r.failed) {
                const auto& names = synth::class_names();
                dataio::write_text_atomic(
                    (fs::path(reports_dir) / "best_heatmap.svg").string(),
                    eval::render_heatmap_svg(
                        r.confusion, std::vector<std::string>(names.begin(),
                                                              names.end())));
                break;
            }
        }
    }

    for (const auto& r : board.reports) {
        std::cout << r.model_name << " "
                  << (r.failed ? ("ERROR: " + r.error)
                               : dataio::format_double(r.accuracy))
                  << "\n";
    }
    if (board.best_confusion_pair.first >= 0) {
        std::cout << "top confusion pair of " << board.best_model << ": {"
                  << synth::class_names()[board.best_confusion_pair.first]
                  << ", "
                  << synth::class_names()[board.best_confusion_pair.second]
                  << "}\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"power-quality event classification benchmark toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth_cmd =
        app.add_subcommand("synth", "generate a labeled waveform dataset");
    std::string synth_out;
    int per_class = 150;
    std::string split = "train";
    std::uint64_t seed = 42;
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--per-class", per_class, "records per class");
    synth_cmd->add_option("--split", split, "split tag")
        ->check(CLI::IsMember({"train", "test"}));
    synth_cmd->add_option("--seed", seed, "master seed");

    // features
    auto* feat_cmd =
        app.add_subcommand("features", "extract wavelet features to CSV");
    std::string feat_dataset, feat_out;
    feat_cmd->add_option("--dataset", feat_dataset, "dataset directory")
        ->required();
    feat_cmd->add_option("--out", feat_out, "output CSV path")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train one classifier");
    std::string train_model, train_csv, train_out;
    std::uint64_t train_seed = 42;
    HyperFlags train_hyper;
    train_cmd->add_option("--model", train_model, "model name")->required();
    train_cmd->add_option("--train", train_csv, "training feature CSV")
        ->required();
    train_cmd->add_option("--out", train_out, "output model JSON")->required();
    train_cmd->add_option("--seed", train_seed, "model seed");
    train_hyper.attach(train_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained model");
    std::string eval_model, eval_csv, eval_report, eval_heatmap;
    eval_cmd->add_option("--model", eval_model, "model JSON path")->required();
    eval_cmd->add_option("--test", eval_csv, "test feature CSV")->required();
    eval_cmd->add_option("--report", eval_report, "output report JSON")
        ->required();
    eval_cmd->add_option("--heatmap", eval_heatmap, "output heatmap SVG");

    // benchmark
    auto* bench_cmd =
        app.add_subcommand("benchmark", "train and rank the model suite");
    std::string bench_train, bench_test, bench_out, bench_reports;
    std::vector<std::string> bench_models;
    std::uint64_t bench_seed = 42;
    HyperFlags bench_hyper;
    bench_cmd->add_option("--train", bench_train, "training feature CSV")
        ->required();
    bench_cmd->add_option("--test", bench_test, "test feature CSV")->required();
    bench_cmd->add_option("--out", bench_out, "output leaderboard CSV")
        ->required();
    bench_cmd->add_option("--reports", bench_reports,
                          "directory for per-model reports");
    bench_cmd->add_option("--models", bench_models,
                          "model names (default: all)");
    bench_cmd->add_option("--seed", bench_seed, "model seed");
    bench_hyper.attach(bench_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed()) {
            if (per_class <= 0) throw std::invalid_argument("--per-class must be positive");
            return run_synth(synth_out, per_class, split, seed);
        }
        if (feat_cmd->parsed()) return run_features(feat_dataset, feat_out);
        if (train_cmd->parsed()) {
            return run_train(train_model, train_csv, train_out,
                             train_hyper.hyper, train_seed);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_model, eval_csv, eval_report, eval_heatmap);
        }
        if (bench_cmd->parsed()) {
            return run_benchmark(bench_train, bench_test, bench_out,
                                 bench_reports, bench_models,
                                 bench_hyper.hyper, bench_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
