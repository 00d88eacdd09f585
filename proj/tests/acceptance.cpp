// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Criterion 2 runs the full-scale pipeline
// (13 classes x 150 train + 150 test) and takes several minutes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "pqbench/dataio.hpp"
#include "pqbench/eval.hpp"
#include "pqbench/features.hpp"
#include "pqbench/models.hpp"
#include "pqbench/parallel.hpp"
#include "pqbench/rng.hpp"
#include "pqbench/synth.hpp"
#include "pqbench/wavelet.hpp"

using namespace pqbench;
using clock_type = std::chrono::steady_clock;

namespace {

struct Criterion {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Criterion 1: numerical property suite
// ---------------------------------------------------------------------------

double band_energy(const std::vector<double>& v) {
    double e = 0.0;
    for (double x : v) e += x * x;
    return e;
}

void check_wavelet(Criterion& c) {
    const wavelet::WaveletFilters& f = wavelet::db4_filters();
    double sum = 0.0, norm = 0.0;
    for (double v : f.h) {
        sum += v;
        norm += v * v;
    }
    c.require(std::abs(sum - std::sqrt(2.0)) <= 1e-12, "filter sum");
    c.require(std::abs(norm - 1.0) <= 1e-12, "filter norm");
    for (int m = 1; m <= 3; ++m) {
        double dot = 0.0;
        for (int k = 0; k + 2 * m < 8; ++k) dot += f.h[k] * f.h[k + 2 * m];
        c.require(std::abs(dot) <= 1e-12, "filter orthogonality");
    }
    for (int p = 0; p <= 3; ++p) {
        double mom = 0.0;
        for (int k = 0; k < 8; ++k) {
            mom += ((k % 2 == 0) ? 1.0 : -1.0) * std::pow(k, p) * f.h[k];
        }
        c.require(std::abs(mom) <= 1e-10, "vanishing moments");
    }

    // Parseval on 1000 random signals; oracle equivalence via a second,
    // index-by-index convolution on a subset.
    SplitMix64 rng(1001);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(1000);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        const auto padded = wavelet::pad_to_1024(x);
        const double in = band_energy(padded);
        const wavelet::SubbandSet s = wavelet::wavedec5(x);
        double out = 0.0;
        for (const auto& b : s.bands) out += band_energy(b);
        if (std::abs(out - in) > 1e-9 * in) {
            c.require(false, "Parseval");
            break;
        }
        if (trial < 5) {
            // naive one-level oracle on the padded signal
            const auto [a, d] = wavelet::analysis_step(padded, f);
            for (std::size_t k = 0; k < d.size(); ++k) {
                double sd = 0.0;
                for (int m = 0; m < 8; ++m) {
                    sd += f.g[m] * padded[(2 * k + m) % padded.size()];
                }
                if (std::abs(sd - d[k]) > 1e-12) {
                    c.require(false, "DWT oracle");
                    break;
                }
            }
            (void)a;
        }
    }
}

void check_stats(Criterion& c) {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(256);
        for (double& x : v) x = rng.uniform(-2.0, 2.0);
        const auto got = features::subband_stats(v);
        // two-pass oracle
        const double n = 256.0;
        double mean = 0.0;
        for (double x : v) mean += x / n;
        double m2 = 0.0, m3 = 0.0, m4 = 0.0, energy = 0.0, mx = 0.0;
        for (double x : v) {
            m2 += std::pow(x - mean, 2.0) / n;
            m3 += std::pow(x - mean, 3.0) / n;
            m4 += std::pow(x - mean, 4.0) / n;
            energy += x * x;
            mx = std::max(mx, std::abs(x));
        }
        double entropy = 0.0;
        for (double x : v) {
            const double p = x * x / energy;
            if (p > 0.0) entropy -= p * std::log(p);
        }
        const double want[8] = {mean,
                                std::sqrt(m2),
                                std::sqrt(energy / n),
                                energy,
                                m3 / std::pow(m2, 1.5),
                                m4 / (m2 * m2),
                                entropy,
                                mx};
        for (int s = 0; s < 8; ++s) {
            const double scale = std::max(std::abs(want[s]), 1.0);
            if (std::abs(got[s] - want[s]) > 1e-12 * scale) {
                c.require(false, "subband_stats oracle stat " +
                                     features::stat_names()[s]);
            }
        }
    }
}

void check_smo(Criterion& c) {
    using models::KernelKind;
    auto kmatrix = [](KernelKind kind,
                      const std::vector<std::vector<double>>& x, double g) {
        const int n = static_cast<int>(x.size());
        std::vector<double> k(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                k[i * n + j] = models::kernel(kind, x[i], x[j], g);
        return k;
    };
    auto dual = [](const std::vector<double>& kmat,
                   const std::vector<int>& y,
                   const std::vector<double>& alpha) {
        const int n = static_cast<int>(y.size());
        double obj = 0.0;
        for (int i = 0; i < n; ++i) obj += alpha[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] *
                       kmat[i * n + j];
        return obj;
    };

    // two-point analytic case, exact to 1e-9
    {
        const std::vector<std::vector<double>> x = {{0.0, 0.0}, {2.0, 0.0}};
        const std::vector<int> y = {-1, 1};
        const auto kmat = kmatrix(KernelKind::LINEAR, x, 1.0);
        const models::SmoResult r = models::smo_binary(kmat, y, 10.0);
        c.require(std::abs(r.alpha[0] - 0.5) <= 1e-9 &&
                      std::abs(r.alpha[1] - 0.5) <= 1e-9 &&
                      std::abs(r.bias + 1.0) <= 1e-9,
                  "SMO two-point analytic solution");
    }

    // XOR grid-search agreement plus constraint maintenance
    {
        const std::vector<std::vector<double>> x = {
            {0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}};
        const std::vector<int> y = {-1, -1, 1, 1};
        const double cbox = 10.0;
        const auto kmat = kmatrix(KernelKind::CUBIC, x, 1.0);
        const models::SmoResult r = models::smo_binary(kmat, y, cbox);
        double sum = 0.0;
        bool box = true;
        for (int i = 0; i < 4; ++i) {
            sum += r.alpha[i] * y[i];
            box = box && r.alpha[i] >= 0.0 && r.alpha[i] <= cbox + 1e-12;
        }
        c.require(std::abs(sum) <= 1e-9 && box && r.worst_kkt <= 1e-3,
                  "SMO constraints on XOR");

        // dense grid over the feasible simplex at 0.01*C resolution
        const double h = cbox / 100.0;
        double best = -1e300;
        std::vector<double> alpha(4);
        for (int i0 = 0; i0 <= 100; ++i0)
            for (int i1 = 0; i1 <= 100; ++i1)
                for (int i2 = 0; i2 <= 100; ++i2) {
                    alpha[0] = i0 * h;
                    alpha[1] = i1 * h;
                    alpha[2] = i2 * h;
                    const double last =
                        -(alpha[0] * y[0] + alpha[1] * y[1] +
                          alpha[2] * y[2]) *
                        y[3];
                    if (last < -1e-12 || last > cbox + 1e-12) continue;
                    alpha[3] = std::min(std::max(last, 0.0), cbox);
                    best = std::max(best, dual(kmat, y, alpha));
                }
        double kmax = 0.0;
        for (double v : kmat) kmax = std::max(kmax, std::abs(v));
        const double slack = 4 * h * (1.0 + 4 * cbox * kmax);
        const double smo_obj = dual(kmat, y, r.alpha);
        c.require(smo_obj >= best - slack && smo_obj <= best + slack,
                  "SMO grid-search dual agreement");
    }
}

void check_gradients(Criterion& c) {
    SplitMix64 rng(404);
    // softmax grad/hess
    for (int trial = 0; trial < 10; ++trial) {
        const int k = 3 + static_cast<int>(rng.next_below(4));
        std::vector<double> scores(k);
        for (double& s : scores) s = rng.uniform(-2.0, 2.0);
        const int label = static_cast<int>(rng.next_below(k));
        std::vector<double> grad, hess;
        models::softmax_grad_hess(scores, label, grad, hess);
        auto loss = [&](const std::vector<double>& s) {
            double mx = s[0];
            for (double v : s) mx = std::max(mx, v);
            double z = 0.0;
            for (double v : s) z += std::exp(v - mx);
            return -(s[label] - mx - std::log(z));
        };
        const double h = 1e-4;
        for (int j = 0; j < k; ++j) {
            std::vector<double> up = scores, dn = scores;
            up[j] += h;
            dn[j] -= h;
            const double fd = (loss(up) - loss(dn)) / (2.0 * h);
            std::vector<double> gu, gd, tmp;
            models::softmax_grad_hess(up, label, gu, tmp);
            models::softmax_grad_hess(dn, label, gd, tmp);
            const double fh = (gu[j] - gd[j]) / (2.0 * h);
            c.require(std::abs(grad[j] - fd) <=
                          1e-6 * std::max(std::abs(fd), 1e-3),
                      "softmax gradient finite differences");
            c.require(std::abs(hess[j] - fh) <=
                          1e-6 * std::max(std::abs(fh), 1e-3),
                      "softmax hessian finite differences");
        }
    }

    // logistic regression gradient
    models::Dataset data;
    for (int i = 0; i < 24; ++i) {
        data.x.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        data.y.push_back(i % 3);
    }
    const int k = 3, d = 2;
    std::vector<double> w(k * (d + 1));
    for (double& v : w) v = rng.uniform(-0.5, 0.5);
    const double lambda = 1e-3, h = 1e-6;
    const auto grad = models::detail::logreg_gradient_for_test(data, w, k, lambda);
    for (std::size_t j = 0; j < w.size(); ++j) {
        std::vector<double> up = w, dn = w;
        up[j] += h;
        dn[j] -= h;
        const double fd =
            (models::detail::logreg_loss_for_test(data, up, k, lambda) -
             models::detail::logreg_loss_for_test(data, dn, k, lambda)) /
            (2.0 * h);
        c.require(std::abs(grad[j] - fd) <=
                      1e-6 * std::max(std::abs(fd), 1e-3),
                  "logreg gradient finite differences");
    }
}

void check_determinism(Criterion& c) {
    synth::CircuitConfig cfg;
    auto run_once = [&]() {
        const auto records = synth::generate_dataset(cfg, 5, 2);
        const auto feats = features::extract_features(records);
        models::Dataset train_set = models::dataset_from_features(feats);
        models::ModelSpec knn, gnb;
        knn.kind = models::ModelKind::KNN;
        gnb.kind = models::ModelKind::GNB;
        const eval::Leaderboard board =
            eval::benchmark(train_set, train_set, {knn, gnb}, 1, 1);
        std::string blob;
        for (const auto& r : records) {
            for (const auto& ch : r.samples) {
                blob.append(reinterpret_cast<const char*>(ch.data()),
                            ch.size() * sizeof(double));
            }
        }
        models::ModelSpec svm;
        svm.kind = models::ModelKind::CUBIC_SVM;
        const models::TrainedModel model = models::train(svm, train_set);
        return std::make_pair(eval::fnv1a64(blob),
                              eval::fnv1a64(dataio::model_to_json(model) +
                                            dataio::leaderboard_csv(board)));
    };
    const auto a = run_once();
    const auto b = run_once();
    c.require(a.first == b.first, "dataset bytes differ between reruns");
    c.require(a.second == b.second, "model/leaderboard bytes differ");
}

// ---------------------------------------------------------------------------
// Criteria 2 and 3: full-scale pipeline
// ---------------------------------------------------------------------------

struct FullScale {
    eval::Leaderboard board;
    double wall_seconds = 0.0;
};

FullScale run_full_scale() {
    const auto t0 = clock_type::now();
    synth::CircuitConfig cfg;
    const auto train_records = synth::generate_dataset(cfg, 42, 150);
    const auto test_records = synth::generate_dataset(cfg, 43, 150);

    std::vector<features::FeatureVector> train_rows(train_records.size());
    std::vector<features::FeatureVector> test_rows(test_records.size());
    parallel_for(static_cast<int>(train_records.size()), [&](int i) {
        train_rows[i] = features::extract_features(train_records[i]);
    });
    parallel_for(static_cast<int>(test_records.size()), [&](int i) {
        test_rows[i] = features::extract_features(test_records[i]);
    });
    const models::Dataset train_set = models::dataset_from_features(train_rows);
    const models::Dataset test_set = models::dataset_from_features(test_rows);

    std::vector<models::ModelSpec> specs;
    for (models::ModelKind kind : models::all_kinds()) {
        models::ModelSpec s;
        s.kind = kind;
        s.seed = 42;
        specs.push_back(s);
    }
    FullScale out;
    out.board = eval::benchmark(train_set, test_set, specs, 0, 0);
    out.wall_seconds = seconds_since(t0);
    return out;
}

double accuracy_of(const eval::Leaderboard& board, const std::string& name,
                   bool* found = nullptr, bool* failed = nullptr) {
    for (const auto& r : board.reports) {
        if (r.model_name == name) {
            if (found) *found = true;
            if (failed) *failed = r.failed;
            return r.accuracy;
        }
    }
    if (found) *found = false;
    return 0.0;
}

// ---------------------------------------------------------------------------
// Criterion 4: degenerate inputs
// ---------------------------------------------------------------------------

void check_degenerate(Criterion& c) {
    // zero-signal record: 288 zero features, no crash
    synth::WaveformRecord zero;
    for (auto& ch : zero.samples) ch.assign(1000, 0.0);
    const features::FeatureVector fv = features::extract_features(zero);
    for (double v : fv.values) {
        if (v != 0.0 || !std::isfinite(v)) {
            c.require(false, "zero record features not all zero");
            break;
        }
    }

    // constant subband: guarded statistics
    const auto s = features::subband_stats(std::vector<double>(32, 2.0));
    c.require(s[1] == 0.0 && s[4] == 0.0 && s[5] == 0.0, "constant subband guard");
    bool finite = true;
    for (double v : s) finite = finite && std::isfinite(v);
    c.require(finite, "constant subband finiteness");

    // single-class training rejection
    models::Dataset single;
    single.x = {{0.0}, {1.0}};
    single.y = {4, 4};
    models::ModelSpec spec;
    spec.kind = models::ModelKind::KNN;
    bool threw = false;
    try {
        models::train(spec, single);
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    c.require(threw, "single-class training not rejected");

    // truncated dataset file
    const std::string dir = "/tmp/pqbench_acceptance_trunc";
    std::system(("rm -rf " + dir).c_str());
    synth::CircuitConfig cfg;
    std::vector<synth::WaveformRecord> recs;
    for (int i = 0; i < 2; ++i) {
        recs.push_back(synth::generate_record(
            cfg, synth::EventClass::AG, 1, i, i));
    }
    dataio::write_dataset(recs, dir);
    std::FILE* fp = std::fopen((dir + "/waveforms.f64le").c_str(), "r+");
    if (fp) {
        std::fclose(fp);
        std::error_code ec;
        std::filesystem::resize_file(dir + "/waveforms.f64le", 48000 + 100,
                                     ec);
    }
    threw = false;
    try {
        dataio::read_dataset(dir);
    } catch (const std::exception&) {
        threw = true;
    }
    c.require(threw, "truncated blob not rejected");
    std::system(("rm -rf " + dir).c_str());
}

void report(int number, const Criterion& c, const std::string& label) {
    std::printf("CRITERION %d (%s): %s%s%s\n", number, label.c_str(),
                c.ok ? "PASS" : "FAIL", c.detail.empty() ? "" : " - ",
                c.detail.c_str());
    std::fflush(stdout);
}

}  // namespace

int main() {
    if (!std::getenv("PQBENCH_THREADS")) {
        const unsigned hw = std::thread::hardware_concurrency();
        const unsigned workers = hw == 0 ? 1 : std::min(hw, 8u);
        setenv("PQBENCH_THREADS", std::to_string(workers).c_str(), 1);
    }

    // Criterion 1
    Criterion c1;
    const auto t1 = clock_type::now();
    check_wavelet(c1);
    check_stats(c1);
    check_smo(c1);
    check_gradients(c1);
    check_determinism(c1);
    const double c1_time = seconds_since(t1);
    c1.require(c1_time < 60.0, "numerical suite exceeded 60 s");
    report(1, c1, "numerical property suite, " +
                      std::to_string(c1_time).substr(0, 5) + " s");

    // Criterion 2
    Criterion c2;
    const FullScale full = run_full_scale();
    bool all_ok = true;
    for (const auto& r : full.board.reports) {
        std::printf("  %-12s %s\n", r.model_name.c_str(),
                    r.failed ? ("ERROR: " + r.error).c_str()
                             : dataio::format_double(r.accuracy).c_str());
        all_ok = all_ok && !r.failed;
    }
    c2.require(all_ok, "a model failed to complete");
    c2.require(full.board.reports.size() == 9, "model count");
    bool found = false, failed = false;
    const double cubic = accuracy_of(full.board, "cubic-svm", &found, &failed);
    c2.require(found && !failed && cubic >= 0.90, "cubic-svm below 0.90");
    const double gbt = accuracy_of(full.board, "gbt", &found, &failed);
    c2.require(found && !failed && gbt >= 0.90, "gbt below 0.90");
    const double lin = accuracy_of(full.board, "linear-svm", &found, &failed);
    c2.require(found && !failed && lin >= 0.88, "linear-svm below 0.88");
    c2.require(full.wall_seconds <= 900.0, "pipeline exceeded 15 minutes");
    report(2, c2, "full-scale benchmark, " +
                      std::to_string(full.wall_seconds).substr(0, 6) + " s");

    // Criterion 3
    Criterion c3;
    {
        // best SVM by accuracy (leaderboard is already sorted)
        const eval::EvalReport* best_svm = nullptr;
        for (const auto& r : full.board.reports) {
            if (r.failed) continue;
            if (r.model_name == "linear-svm" || r.model_name == "cubic-svm" ||
                r.model_name == "rbf-svm") {
                best_svm = &r;
                break;
            }
        }
        c3.require(best_svm != nullptr, "no SVM completed");
        if (best_svm) {
            const eval::ConfusionMatrix& conf = best_svm->confusion;
            // unconditional report-correctness check: the reported top pair
            // must match an independent recomputation
            std::pair<int, int> top = {-1, -1}, second = {-1, -1};
            std::int64_t m1 = -1, m2 = -1;
            for (int a = 0; a < conf.num_classes; ++a) {
                for (int b = a + 1; b < conf.num_classes; ++b) {
                    const std::int64_t mass = conf.at(a, b) + conf.at(b, a);
                    if (mass > m1) {
                        m2 = m1;
                        second = top;
                        m1 = mass;
                        top = {a, b};
                    } else if (mass > m2) {
                        m2 = mass;
                        second = {a, b};
                    }
                }
            }
            c3.require(eval::top_confusion_pair(conf) == top,
                       "reported top pair mismatches recomputation");
            const auto& names = synth::class_names();
            std::printf("  best SVM: %s; top confusion pairs: {%s,%s} and "
                        "{%s,%s}\n",
                        best_svm->model_name.c_str(), names[top.first].c_str(),
                        names[top.second].c_str(),
                        second.first >= 0 ? names[second.first].c_str() : "-",
                        second.second >= 0 ? names[second.second].c_str()
                                           : "-");
            const std::pair<int, int> abc_abcg = {6, 10};  // ABCG=6, ABC=10
            c3.require(top == abc_abcg || second == abc_abcg,
                       "{ABC, ABCG} not among the top two confusion pairs");
        }
    }
    report(3, c3, "confusion-structure reproduction");

    // Criterion 4
    Criterion c4;
    check_degenerate(c4);
    report(4, c4, "degenerate-input suite");

    const bool all = c1.ok && c2.ok && c3.ok && c4.ok;
    std::printf("ACCEPTANCE: %s\n", all ? "PASS" : "FAIL");
    return all ? 0 : 1;
}
