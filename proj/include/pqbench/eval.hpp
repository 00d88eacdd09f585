#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pqbench/models.hpp"

namespace pqbench::eval {

struct ConfusionMatrix {
    int num_classes = synth::kNumClasses;
    std::vector<std::int64_t> counts;  // row-major, rows = true class

    std::int64_t& at(int true_class, int pred_class) {
        return counts[true_class * num_classes + pred_class];
    }
    std::int64_t at(int true_class, int pred_class) const {
        return counts[true_class * num_classes + pred_class];
    }
    std::int64_t total() const;
    std::int64_t trace() const;
};

ConfusionMatrix confusion(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred,
                          int num_classes = synth::kNumClasses);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    std::string model_name;
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    ConfusionMatrix confusion;
    double train_seconds = 0.0;
    double predict_seconds = 0.0;
    std::uint64_t train_digest = 0;
    std::uint64_t test_digest = 0;
    bool failed = false;
    std::string error;
};

// accuracy = trace/total; precision/recall/F1 with the 0/0 -> 0 convention
void fill_metrics(EvalReport& report);

// Unordered class pair with the largest off-diagonal mass
// (c_ij + c_ji); ties resolve to the lexicographically lowest pair.
std::pair<int, int> top_confusion_pair(const ConfusionMatrix& conf);

// Trains every spec and evaluates it on the test set. A model that throws
// is reported with failed=true instead of aborting the run. The result is
// sorted by descending accuracy, ties by model name ascending.
struct Leaderboard {
    std::vector<EvalReport> reports;  // sorted
    std::pair<int, int> best_confusion_pair = {-1, -1};
    std::string best_model;
    std::vector<models::TrainedModel> models;  // parallel to reports
};

Leaderboard benchmark(const models::Dataset& train_set,
                      const models::Dataset& test_set,
                      const std::vector<models::ModelSpec>& specs,
                      std::uint64_t train_digest, std::uint64_t test_digest);

// Standalone SVG heatmap of the matrix: 13x13 cells colored on a linear
// scale from 0 to the row maximum, with count annotations. Byte-identical
// output for identical input.
std::string render_heatmap_svg(const ConfusionMatrix& conf,
                               const std::vector<std::string>& class_names);

// FNV-1a 64-bit content hash used for dataset digests.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace pqbench::eval
