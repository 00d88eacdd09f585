#include "pqbench/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pqbench::eval {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t sum = 0;
    for (std::int64_t c : counts) sum += c;
    return sum;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t sum = 0;
    for (int i = 0; i < num_classes; ++i) sum += at(i, i);
    return sum;
}

ConfusionMatrix confusion(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred, int num_classes) {
    if (y_true.size() != y_pred.size()) {
        throw std::invalid_argument("confusion: length mismatch");
    }
    ConfusionMatrix conf;
    conf.num_classes = num_classes;
    conf.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= num_classes || y_pred[i] < 0 ||
            y_pred[i] >= num_classes) {
            throw std::invalid_argument("confusion: class code out of range");
        }
        conf.at(y_true[i], y_pred[i]) += 1;
    }
    return conf;
}

void fill_metrics(EvalReport& report) {
    const ConfusionMatrix& conf = report.confusion;
    const std::int64_t total = conf.total();
    if (conf.counts.empty() || total == 0) {
        throw std::invalid_argument("fill_metrics: empty confusion matrix");
    }
    report.accuracy =
        static_cast<double>(conf.trace()) / static_cast<double>(total);
    report.per_class.assign(conf.num_classes, ClassMetrics{});
    for (int j = 0; j < conf.num_classes; ++j) {
        std::int64_t colsum = 0, rowsum = 0;
        for (int i = 0; i < conf.num_classes; ++i) {
            colsum += conf.at(i, j);
            rowsum += conf.at(j, i);
        }
        const std::int64_t hit = conf.at(j, j);
        ClassMetrics& m = report.per_class[j];
        m.precision = colsum > 0 ? static_cast<double>(hit) / colsum : 0.0;
        m.recall = rowsum > 0 ? static_cast<double>(hit) / rowsum : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
}

std::pair<int, int> top_confusion_pair(const ConfusionMatrix& conf) {
    std::pair<int, int> best = {-1, -1};
    std::int64_t best_mass = -1;
    for (int a = 0; a < conf.num_classes; ++a) {
        for (int b = a + 1; b < conf.num_classes; ++b) {
            const std::int64_t mass = conf.at(a, b) + conf.at(b, a);
            if (mass > best_mass) {
                best_mass = mass;
                best = {a, b};
            }
        }
    }
    return best;
}

Leaderboard benchmark(const models::Dataset& train_set,
                      const models::Dataset& test_set,
                      const std::vector<models::ModelSpec>& specs,
                      std::uint64_t train_digest, std::uint64_t test_digest) {
    using clock = std::chrono::steady_clock;
    Leaderboard board;
    for (const auto& spec : specs) {
        EvalReport report;
        report.model_name = models::kind_name(spec.kind);
        report.train_digest = train_digest;
        report.test_digest = test_digest;
        models::TrainedModel model;
        try {
            const auto t0 = clock::now();
            model = models::train(spec, train_set);
            const auto t1 = clock::now();
            const std::vector<int> pred =
                models::predict_batch(model, test_set.x);
            const auto t2 = clock::now();
            report.train_seconds =
                std::chrono::duration<double>(t1 - t0).count();
            report.predict_seconds =
                std::chrono::duration<double>(t2 - t1).count();
            report.confusion = confusion(test_set.y, pred);
            fill_metrics(report);
        } catch (const std::exception& e) {
            report.failed = true;
            report.error = e.what();
            report.accuracy = 0.0;
        }
        board.reports.push_back(std::move(report));
        board.models.push_back(std::move(model));
    }

    std::vector<std::size_t> order(board.reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const EvalReport& ra = board.reports[a];
        const EvalReport& rb = board.reports[b];
        if (ra.accuracy != rb.accuracy) return ra.accuracy > rb.accuracy;
        return ra.model_name < rb.model_name;
    });
    std::vector<EvalReport> sorted_reports;
    std::vector<models::TrainedModel> sorted_models;
    for (std::size_t i : order) {
        sorted_reports.push_back(std::move(board.reports[i]));
        sorted_models.push_back(std::move(board.models[i]));
    }
    board.reports = std::move(sorted_reports);
    board.models = std::move(sorted_models);

    for (const auto& r : board.reports) {
        if (!r.failed) {
            board.best_model = r.model_name;
            board.best_confusion_pair = top_confusion_pair(r.confusion);
            break;
        }
    }
    return board;
}

std::string render_heatmap_svg(const ConfusionMatrix& conf,
                               const std::vector<std::string>& class_names) {
    const int n = conf.num_classes;
    const int cell = 48;
    const int margin = 120;
    const int width = margin + n * cell + 20;
    const int height = margin + n * cell + 20;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << margin + n * cell / 2
        << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">predicted class</text>\n";
    svg << "<text x=\"16\" y=\"" << margin + n * cell / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\" transform=\"rotate(-90 16 "
        << margin + n * cell / 2 << ")\">true class</text>\n";

    for (int i = 0; i < n; ++i) {
        // row maximum fixes the color scale for that row
        std::int64_t row_max = 0;
        for (int j = 0; j < n; ++j) row_max = std::max(row_max, conf.at(i, j));
        for (int j = 0; j < n; ++j) {
            const double frac =
                row_max > 0
                    ? static_cast<double>(conf.at(i, j)) / row_max
                    : 0.0;
            // white -> steel blue
            const int r = static_cast<int>(std::lround(255 - frac * 185));
            const int g = static_cast<int>(std::lround(255 - frac * 125));
            const int b = static_cast<int>(std::lround(255 - frac * 75));
            const int x = margin + j * cell;
            const int y = margin + i * cell;
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
            svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"" << color
                << "\" stroke=\"#cccccc\"/>\n";
            svg << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                   "font-size=\"11\" fill=\""
                << (frac > 0.6 ? "white" : "black") << "\">" << conf.at(i, j)
                << "</text>\n";
        }
    }
    for (int i = 0; i < n; ++i) {
        const std::string& name =
            i < static_cast<int>(class_names.size()) ? class_names[i]
                                                     : std::to_string(i);
        svg << "<text x=\"" << margin - 6 << "\" y=\""
            << margin + i * cell + cell / 2 + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"10\">"
            << name << "</text>\n";
        svg << "<text x=\"" << margin + i * cell + cell / 2 << "\" y=\""
            << margin - 8
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"10\" transform=\"rotate(-60 "
            << margin + i * cell + cell / 2 << " " << margin - 8 << ")\">"
            << name << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace pqbench::eval
