#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pqbench/features.hpp"

namespace pqbench::models {

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

enum class ModelKind {
    LINEAR_SVM,
    CUBIC_SVM,
    RBF_SVM,
    GBT,
    LOGREG,
    KNN,
    CART,
    FOREST,
    GNB,
};

inline constexpr int kNumModelKinds = 9;

// canonical lowercase names: linear-svm, cubic-svm, rbf-svm, gbt, logreg,
// knn, cart, forest, gnb
const std::string& kind_name(ModelKind kind);
ModelKind kind_from_name(const std::string& name);
std::vector<ModelKind> all_kinds();

struct Hyper {
    // SVM family
    double svm_c = 1.0;
    double svm_gamma = 0.0;  // 0 means 1/d on normalized features
    double svm_tol = 1e-3;
    int svm_max_sweeps = 10000;
    // gradient boosting
    int gbt_rounds = 50;
    double gbt_eta = 0.3;
    double gbt_lambda = 1.0;
    double gbt_gamma = 0.0;
    int gbt_max_depth = 6;
    // logistic regression
    double logreg_lambda = 1e-4;
    int logreg_max_iters = 2000;
    // KNN
    int knn_k = 5;
    // CART / forest
    int cart_max_depth = 0;  // 0 = unlimited
    int forest_trees = 100;
    int forest_features = 0;  // 0 = ceil(sqrt(d))
    bool forest_bootstrap = true;
};

struct ModelSpec {
    ModelKind kind = ModelKind::CUBIC_SVM;
    Hyper hyper;
    std::uint64_t seed = 0;
};

// throws std::invalid_argument when a hyperparameter is out of range
void validate_spec(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

struct Dataset {
    std::vector<std::vector<double>> x;
    std::vector<int> y;  // class codes >= 0

    int size() const { return static_cast<int>(x.size()); }
    int dim() const { return x.empty() ? 0 : static_cast<int>(x[0].size()); }
};

Dataset dataset_from_features(const std::vector<features::FeatureVector>& fv);

// ---------------------------------------------------------------------------
// Kernels and SMO
// ---------------------------------------------------------------------------

enum class KernelKind { LINEAR, CUBIC, RBF };

double kernel(KernelKind kind, const std::vector<double>& x,
              const std::vector<double>& z, double gamma);

struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
    int passes = 0;
    std::vector<double> objective_per_pass;  // dual objective after each pass
    double worst_kkt = 0.0;                  // residual at convergence
};

// Solves the binary soft-margin dual over a precomputed kernel matrix
// (row-major n x n). Labels are +1/-1. Converges when every KKT condition
// holds within tol; throws std::runtime_error after max_sweeps passes.
SmoResult smo_binary(const std::vector<double>& kmat, const std::vector<int>& y,
                     double c, double tol = 1e-3, int max_sweeps = 10000);

// One-vs-one vote aggregation. decisions holds one signed value per pair
// (a, b) with a < b in lexicographic order; a positive value favors a.
// Ties: vote count, then sum of winning decision magnitudes, then lower code.
int ovo_aggregate(int num_classes, const std::vector<double>& decisions);

// ---------------------------------------------------------------------------
// Learned state
// ---------------------------------------------------------------------------

struct SvmMachine {
    int class_a = 0;
    int class_b = 0;
    double bias = 0.0;
    std::vector<double> alpha_y;               // alpha_i * y_i, support only
    std::vector<std::vector<double>> vectors;  // normalized support vectors
};

struct SvmState {
    KernelKind kernel = KernelKind::LINEAR;
    double gamma = 0.0;
    std::vector<int> classes;  // present class codes, ascending
    std::vector<SvmMachine> machines;
};

struct TreeNode {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf weight (GBT) or class code (CART/forest)
};

struct Tree {
    std::vector<TreeNode> nodes;

    // index of the leaf reached by v
    int descend(const std::vector<double>& v) const;
};

struct GbtState {
    int num_classes = 0;
    double eta = 0.0;
    // trees[round * num_classes + k]
    std::vector<Tree> trees;

    std::vector<double> scores(const std::vector<double>& v) const;
};

struct LogRegState {
    int num_classes = 0;
    int dim = 0;
    std::vector<double> w;  // row-major num_classes x (dim + 1), last = bias
};

struct KnnState {
    int k = 5;
    std::vector<std::vector<double>> x;  // normalized training vectors
    std::vector<int> y;
};

struct CartState {
    Tree tree;
};

struct ForestState {
    std::vector<Tree> trees;
};

struct GnbState {
    std::vector<int> classes;           // present class codes, ascending
    std::vector<double> log_priors;     // per present class
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> vars;

    std::vector<double> log_posteriors(const std::vector<double>& v) const;
};

using ModelState = std::variant<SvmState, GbtState, LogRegState, KnnState,
                                CartState, ForestState, GnbState>;

struct TrainedModel {
    ModelSpec spec;
    features::Normalizer normalizer;
    ModelState state;
};

// ---------------------------------------------------------------------------
// Training and prediction
// ---------------------------------------------------------------------------

TrainedModel train(const ModelSpec& spec, const Dataset& data);

int predict(const TrainedModel& model, const std::vector<double>& v);
std::vector<int> predict_batch(const TrainedModel& model,
                               const std::vector<std::vector<double>>& x);

// Individual trainers, exposed for direct testing. All operate on
// already-normalized data.

GbtState train_gbt(const Dataset& data, int rounds, double eta, double lambda,
                   double gamma_reg, int max_depth);

LogRegState train_logreg(const Dataset& data, double lambda_reg,
                         int max_iters);

CartState train_cart(const Dataset& data, int max_depth);
ForestState train_forest(const Dataset& data, int n_trees, int features_per_split,
                         bool bootstrap, std::uint64_t seed);
GnbState train_gnb(const Dataset& data);

// Softmax cross-entropy gradient and hessian for one sample, exposed so the
// finite-difference oracle can target exactly what the booster uses.
void softmax_grad_hess(const std::vector<double>& scores, int label,
                       std::vector<double>& grad, std::vector<double>& hess);

namespace detail {
// logistic-regression objective and gradient, exposed for the
// finite-difference oracle
double logreg_loss_for_test(const Dataset& data, const std::vector<double>& w,
                            int num_classes, double lambda);
std::vector<double> logreg_gradient_for_test(const Dataset& data,
                                             const std::vector<double>& w,
                                             int num_classes, double lambda);
}  // namespace detail

}  // namespace pqbench::models
