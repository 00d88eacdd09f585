#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pqbench/models.hpp"

namespace pqbench::models {

void softmax_grad_hess(const std::vector<double>& scores, int label,
                       std::vector<double>& grad, std::vector<double>& hess) {
    const int k = static_cast<int>(scores.size());
    grad.resize(k);
    hess.resize(k);
    const double smax = *std::max_element(scores.begin(), scores.end());
    double denom = 0.0;
    for (double s : scores) denom += std::exp(s - smax);
    for (int i = 0; i < k; ++i) {
        const double p = std::exp(scores[i] - smax) / denom;
        grad[i] = p - (i == label ? 1.0 : 0.0);
        hess[i] = p * (1.0 - p);
    }
}

namespace {

// Level-wise exact-greedy regression tree over presorted feature orders.
// Ties on split gain resolve to the lowest feature index, then the lowest
// threshold (the scan visits candidates in exactly that order and keeps
// strict improvements only).
Tree build_tree(const Dataset& data, const std::vector<double>& grad,
                const std::vector<double>& hess,
                const std::vector<std::vector<int>>& order, double lambda,
                double gamma_reg, int max_depth) {
    const int n = data.size();
    const int d = data.dim();

    struct NodeAgg {
        double g = 0.0;
        double h = 0.0;
        int count = 0;
        bool open = false;  // still eligible for splitting
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;
    };

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n, 0);
    std::vector<NodeAgg> agg(1);
    for (int i = 0; i < n; ++i) {
        agg[0].g += grad[i];
        agg[0].h += hess[i];
        agg[0].count += 1;
    }
    agg[0].open = agg[0].count >= 2;
    std::vector<int> level = {0};

    auto score = [&](double g, double h) { return g * g / (h + lambda); };

    for (int depth = 0; depth < max_depth && !level.empty(); ++depth) {
        // running left-side accumulators per open node
        struct Running {
            double g = 0.0;
            double h = 0.0;
            int count = 0;
            double prev_value = 0.0;
            bool started = false;
        };
        for (int f = 0; f < d; ++f) {
            std::vector<Running> run(tree.nodes.size());
            for (int pos = 0; pos < n; ++pos) {
                const int i = order[f][pos];
                const int node = node_of[i];
                if (node < 0 || !agg[node].open) continue;
                Running& r = run[node];
                const double v = data.x[i][f];
                if (r.started && v > r.prev_value && r.count > 0 &&
                    r.count < agg[node].count) {
                    const double gl = r.g, hl = r.h;
                    const double gr = agg[node].g - gl;
                    const double hr = agg[node].h - hl;
                    const double gain =
                        0.5 * (score(gl, hl) + score(gr, hr) -
                               score(agg[node].g, agg[node].h)) -
                        gamma_reg;
                    if (gain > agg[node].best_gain) {
                        agg[node].best_gain = gain;
                        agg[node].best_feature = f;
                        agg[node].best_threshold = 0.5 * (r.prev_value + v);
                    }
                }
                r.g += grad[i];
                r.h += hess[i];
                r.count += 1;
                r.prev_value = v;
                r.started = true;
            }
        }

        std::vector<int> next_level;
        for (int node : level) {
            const bool splittable = agg[node].open &&
                                    agg[node].best_feature >= 0 &&
                                    agg[node].best_gain > 0.0;
            agg[node].open = false;  // finalized either way
            if (!splittable) continue;
            const int left = static_cast<int>(tree.nodes.size());
            const int right = left + 1;
            tree.nodes[node].leaf = false;
            tree.nodes[node].feature = agg[node].best_feature;
            tree.nodes[node].threshold = agg[node].best_threshold;
            tree.nodes[node].left = left;
            tree.nodes[node].right = right;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            agg.resize(tree.nodes.size());
            next_level.push_back(left);
            next_level.push_back(right);
        }
        if (next_level.empty()) break;
        for (int i = 0; i < n; ++i) {
            const int node = node_of[i];
            if (node < 0 || tree.nodes[node].leaf) continue;
            const int child = data.x[i][tree.nodes[node].feature] <
                                      tree.nodes[node].threshold
                                  ? tree.nodes[node].left
                                  : tree.nodes[node].right;
            node_of[i] = child;
            agg[child].g += grad[i];
            agg[child].h += hess[i];
            agg[child].count += 1;
        }
        for (int node : next_level) {
            agg[node].open = agg[node].count >= 2;
        }
        level = std::move(next_level);
    }

    for (auto idx = 0u; idx < tree.nodes.size(); ++idx) {
        if (tree.nodes[idx].leaf) {
            tree.nodes[idx].value = -agg[idx].g / (agg[idx].h + lambda);
        }
    }
    return tree;
}

}  // namespace

GbtState train_gbt(const Dataset& data, int rounds, double eta, double lambda,
                   double gamma_reg, int max_depth) {
    const int n = data.size();
    const int d = data.dim();
    const int num_classes = *std::max_element(data.y.begin(), data.y.end()) + 1;

    // global presort, ties broken by sample index (std::sort on value pairs
    // would not be stable, so sort index pairs explicitly)
    std::vector<std::vector<int>> order(d, std::vector<int>(n));
    for (int f = 0; f < d; ++f) {
        std::iota(order[f].begin(), order[f].end(), 0);
        std::sort(order[f].begin(), order[f].end(), [&](int a, int b) {
            if (data.x[a][f] != data.x[b][f]) return data.x[a][f] < data.x[b][f];
            return a < b;
        });
    }

    GbtState state;
    state.num_classes = num_classes;
    state.eta = eta;
    state.trees.reserve(static_cast<std::size_t>(rounds) * num_classes);

    std::vector<std::vector<double>> scores(
        n, std::vector<double>(num_classes, 0.0));
    std::vector<double> grad_k(n), hess_k(n), g_i, h_i;

    for (int round = 0; round < rounds; ++round) {
        std::vector<std::vector<double>> grads(
            n, std::vector<double>(num_classes));
        std::vector<std::vector<double>> hesses(
            n, std::vector<double>(num_classes));
        for (int i = 0; i < n; ++i) {
            softmax_grad_hess(scores[i], data.y[i], g_i, h_i);
            grads[i] = g_i;
            hesses[i] = h_i;
        }
        for (int k = 0; k < num_classes; ++k) {
            for (int i = 0; i < n; ++i) {
                grad_k[i] = grads[i][k];
                hess_k[i] = hesses[i][k];
            }
            Tree tree = build_tree(data, grad_k, hess_k, order, lambda,
                                   gamma_reg, max_depth);
            for (int i = 0; i < n; ++i) {
                scores[i][k] += eta * tree.nodes[tree.descend(data.x[i])].value;
            }
            state.trees.push_back(std::move(tree));
        }
    }
    return state;
}

}  // namespace pqbench::models
