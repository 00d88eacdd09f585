#include "pqbench/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace pqbench::models {

// ---------------------------------------------------------------------------
// Kinds and specs
// ---------------------------------------------------------------------------

namespace {

const std::array<std::string, kNumModelKinds> kKindNames = {
    "linear-svm", "cubic-svm", "rbf-svm", "gbt", "logreg",
    "knn",        "cart",      "forest",  "gnb"};

}  // namespace

const std::string& kind_name(ModelKind kind) {
    return kKindNames[static_cast<int>(kind)];
}

ModelKind kind_from_name(const std::string& name) {
    for (int i = 0; i < kNumModelKinds; ++i) {
        if (kKindNames[i] == name) return static_cast<ModelKind>(i);
    }
    throw std::invalid_argument("unknown model kind: " + name);
}

std::vector<ModelKind> all_kinds() {
    std::vector<ModelKind> out;
    for (int i = 0; i < kNumModelKinds; ++i) {
        out.push_back(static_cast<ModelKind>(i));
    }
    return out;
}

void validate_spec(const ModelSpec& spec) {
    const Hyper& h = spec.hyper;
    if (!(h.svm_c > 0.0)) throw std::invalid_argument("svm C must be > 0");
    if (h.svm_gamma < 0.0) throw std::invalid_argument("svm gamma must be >= 0");
    if (!(h.svm_tol > 0.0)) throw std::invalid_argument("svm tol must be > 0");
    if (h.svm_max_sweeps < 1) {
        throw std::invalid_argument("svm max sweeps must be >= 1");
    }
    if (h.gbt_rounds < 1) throw std::invalid_argument("gbt rounds must be >= 1");
    if (!(h.gbt_eta > 0.0) || h.gbt_eta > 1.0) {
        throw std::invalid_argument("gbt eta must lie in (0, 1]");
    }
    if (h.gbt_lambda < 0.0) throw std::invalid_argument("gbt lambda must be >= 0");
    if (h.gbt_gamma < 0.0) throw std::invalid_argument("gbt gamma must be >= 0");
    if (h.gbt_max_depth < 1) {
        throw std::invalid_argument("gbt max depth must be >= 1");
    }
    if (!(h.logreg_lambda >= 0.0)) {
        throw std::invalid_argument("logreg lambda must be >= 0");
    }
    if (h.logreg_max_iters < 1) {
        throw std::invalid_argument("logreg max iters must be >= 1");
    }
    if (h.knn_k < 1) throw std::invalid_argument("knn k must be >= 1");
    if (h.cart_max_depth < 0) {
        throw std::invalid_argument("cart max depth must be >= 0");
    }
    if (h.forest_trees < 1) {
        throw std::invalid_argument("forest tree count must be >= 1");
    }
    if (h.forest_features < 0) {
        throw std::invalid_argument("forest features per split must be >= 0");
    }
}

Dataset dataset_from_features(const std::vector<features::FeatureVector>& fv) {
    Dataset data;
    data.x.reserve(fv.size());
    data.y.reserve(fv.size());
    for (const auto& v : fv) {
        data.x.emplace_back(v.values.begin(), v.values.end());
        data.y.push_back(synth::class_code(v.label));
    }
    return data;
}

// ---------------------------------------------------------------------------
// Kernels and OvO aggregation
// ---------------------------------------------------------------------------

double kernel(KernelKind kind, const std::vector<double>& x,
              const std::vector<double>& z, double gamma) {
    if (x.size() != z.size()) {
        throw std::invalid_argument("kernel: dimension mismatch");
    }
    switch (kind) {
        case KernelKind::LINEAR: {
            double dot = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * z[i];
            return dot;
        }
        case KernelKind::CUBIC: {
            double dot = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * z[i];
            const double base = gamma * dot + 1.0;
            return base * base * base;
        }
        case KernelKind::RBF: {
            double dist2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - z[i];
                dist2 += d * d;
            }
            return std::exp(-gamma * dist2);
        }
    }
    throw std::invalid_argument("unknown kernel kind");
}

int ovo_aggregate(int num_classes, const std::vector<double>& decisions) {
    const int expected = num_classes * (num_classes - 1) / 2;
    if (static_cast<int>(decisions.size()) != expected) {
        throw std::invalid_argument("ovo_aggregate: wrong decision count");
    }
    std::vector<int> votes(num_classes, 0);
    std::vector<double> magnitude(num_classes, 0.0);
    int idx = 0;
    for (int a = 0; a < num_classes; ++a) {
        for (int b = a + 1; b < num_classes; ++b, ++idx) {
            const double f = decisions[idx];
            const int winner = (f >= 0.0) ? a : b;
            votes[winner] += 1;
            magnitude[winner] += std::abs(f);
        }
    }
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] && magnitude[c] > magnitude[best])) {
            best = c;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Learned-state helpers
// ---------------------------------------------------------------------------

int Tree::descend(const std::vector<double>& v) const {
    int idx = 0;
    while (!nodes[idx].leaf) {
        idx = (v[nodes[idx].feature] < nodes[idx].threshold) ? nodes[idx].left
                                                             : nodes[idx].right;
    }
    return idx;
}

std::vector<double> GbtState::scores(const std::vector<double>& v) const {
    std::vector<double> s(num_classes, 0.0);
    const int rounds = static_cast<int>(trees.size()) / num_classes;
    for (int r = 0; r < rounds; ++r) {
        for (int k = 0; k < num_classes; ++k) {
            const Tree& tree = trees[r * num_classes + k];
            s[k] += eta * tree.nodes[tree.descend(v)].value;
        }
    }
    return s;
}

std::vector<double> GnbState::log_posteriors(const std::vector<double>& v) const {
    std::vector<double> out(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
        double lp = log_priors[c];
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double var = vars[c][j];
            const double d = v[j] - means[c][j];
            lp += -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
        }
        out[c] = lp;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training dispatch
// ---------------------------------------------------------------------------

namespace detail {
// implemented in svm.cpp
SvmState train_svm(const Dataset& data, KernelKind kind, double c, double gamma,
                   double tol, int max_sweeps);
// implemented in simple_models.cpp
KnnState train_knn(const Dataset& data, int k);
}  // namespace detail

TrainedModel train(const ModelSpec& spec, const Dataset& data) {
    validate_spec(spec);
    if (data.size() < 2) {
        throw std::invalid_argument("training set too small");
    }
    std::set<int> classes(data.y.begin(), data.y.end());
    if (classes.size() < 2) {
        throw std::invalid_argument("training set must contain >= 2 classes");
    }
    for (int c : classes) {
        if (c < 0) throw std::invalid_argument("negative class code");
    }
    const std::size_t dim = data.x.front().size();
    for (const auto& row : data.x) {
        if (row.size() != dim) {
            throw std::invalid_argument("ragged training matrix");
        }
    }
    if (data.x.size() != data.y.size()) {
        throw std::invalid_argument("feature/label count mismatch");
    }

    TrainedModel model;
    model.spec = spec;
    model.normalizer = features::fit_normalizer(data.x);
    Dataset norm;
    norm.y = data.y;
    norm.x.reserve(data.x.size());
    for (const auto& row : data.x) {
        norm.x.push_back(features::apply_normalizer(model.normalizer, row));
    }

    const Hyper& h = spec.hyper;
    const double gamma =
        h.svm_gamma > 0.0 ? h.svm_gamma : 1.0 / static_cast<double>(dim);
    switch (spec.kind) {
        case ModelKind::LINEAR_SVM:
            model.state = detail::train_svm(norm, KernelKind::LINEAR, h.svm_c,
                                            gamma, h.svm_tol, h.svm_max_sweeps);
            break;
        case ModelKind::CUBIC_SVM:
            model.state = detail::train_svm(norm, KernelKind::CUBIC, h.svm_c,
                                            gamma, h.svm_tol, h.svm_max_sweeps);
            break;
        case ModelKind::RBF_SVM:
            model.state = detail::train_svm(norm, KernelKind::RBF, h.svm_c,
                                            gamma, h.svm_tol, h.svm_max_sweeps);
            break;
        case ModelKind::GBT:
            model.state = train_gbt(norm, h.gbt_rounds, h.gbt_eta, h.gbt_lambda,
                                    h.gbt_gamma, h.gbt_max_depth);
            break;
        case ModelKind::LOGREG:
            model.state = train_logreg(norm, h.logreg_lambda, h.logreg_max_iters);
            break;
        case ModelKind::KNN:
            model.state = detail::train_knn(norm, h.knn_k);
            break;
        case ModelKind::CART:
            model.state = train_cart(norm, h.cart_max_depth);
            break;
        case ModelKind::FOREST: {
            const int per_split =
                h.forest_features > 0
                    ? h.forest_features
                    : static_cast<int>(
                          std::ceil(std::sqrt(static_cast<double>(dim))));
            model.state = train_forest(norm, h.forest_trees, per_split,
                                       h.forest_bootstrap, spec.seed);
            break;
        }
        case ModelKind::GNB:
            model.state = train_gnb(norm);
            break;
    }
    return model;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

namespace {

int argmax_low_tie(const std::vector<double>& v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

int predict_svm(const SvmState& st, const std::vector<double>& v) {
    const int nc = static_cast<int>(st.classes.size());
    std::vector<double> decisions;
    decisions.reserve(st.machines.size());
    for (const auto& m : st.machines) {
        double f = m.bias;
        for (std::size_t i = 0; i < m.vectors.size(); ++i) {
            f += m.alpha_y[i] * kernel(st.kernel, m.vectors[i], v, st.gamma);
        }
        decisions.push_back(f);
    }
    const int winner = ovo_aggregate(nc, decisions);
    return st.classes[winner];
}

int predict_knn(const KnnState& st, const std::vector<double>& v) {
    const int n = static_cast<int>(st.x.size());
    std::vector<std::pair<double, int>> dist;
    dist.reserve(n);
    for (int i = 0; i < n; ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double d = st.x[i][j] - v[j];
            d2 += d * d;
        }
        dist.emplace_back(d2, i);
    }
    const int k = std::min(st.k, n);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<int> votes;
    for (int i = 0; i < k; ++i) {
        const int label = st.y[dist[i].second];
        if (label >= static_cast<int>(votes.size())) votes.resize(label + 1, 0);
        votes[label] += 1;
    }
    int best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best]) best = static_cast<int>(c);
    }
    return best;
}

int predict_forest(const ForestState& st, const std::vector<double>& v) {
    std::vector<int> votes;
    for (const auto& tree : st.trees) {
        const int label =
            static_cast<int>(tree.nodes[tree.descend(v)].value);
        if (label >= static_cast<int>(votes.size())) votes.resize(label + 1, 0);
        votes[label] += 1;
    }
    int best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best]) best = static_cast<int>(c);
    }
    return best;
}

int predict_logreg(const LogRegState& st, const std::vector<double>& v) {
    std::vector<double> scores(st.num_classes);
    for (int k = 0; k < st.num_classes; ++k) {
        const double* row = &st.w[static_cast<std::size_t>(k) * (st.dim + 1)];
        double s = row[st.dim];
        for (int j = 0; j < st.dim; ++j) s += row[j] * v[j];
        scores[k] = s;
    }
    return argmax_low_tie(scores);
}

}  // namespace

int predict(const TrainedModel& model, const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != model.normalizer.dim()) {
        throw std::invalid_argument("predict: dimension mismatch");
    }
    const std::vector<double> z = features::apply_normalizer(model.normalizer, v);
    return std::visit(
        [&](const auto& st) -> int {
            using T = std::decay_t<decltype(st)>;
            if constexpr (std::is_same_v<T, SvmState>) {
                return predict_svm(st, z);
            } else if constexpr (std::is_same_v<T, GbtState>) {
                return argmax_low_tie(st.scores(z));
            } else if constexpr (std::is_same_v<T, LogRegState>) {
                return predict_logreg(st, z);
            } else if constexpr (std::is_same_v<T, KnnState>) {
                return predict_knn(st, z);
            } else if constexpr (std::is_same_v<T, CartState>) {
                return static_cast<int>(
                    st.tree.nodes[st.tree.descend(z)].value);
            } else if constexpr (std::is_same_v<T, ForestState>) {
                return predict_forest(st, z);
            } else {
                const std::vector<double> lp = st.log_posteriors(z);
                int best = 0;
                for (std::size_t c = 1; c < lp.size(); ++c) {
                    if (lp[c] > lp[best]) best = static_cast<int>(c);
                }
                return st.classes[best];
            }
        },
        model.state);
}

std::vector<int> predict_batch(const TrainedModel& model,
                               const std::vector<std::vector<double>>& x) {
    std::vector<int> out;
    out.reserve(x.size());
    for (const auto& v : x) out.push_back(predict(model, v));
    return out;
}

}  // namespace pqbench::models
