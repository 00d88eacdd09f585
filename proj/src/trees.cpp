#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "pqbench/models.hpp"
#include "pqbench/parallel.hpp"
#include "pqbench/rng.hpp"

namespace pqbench::models {

namespace {

constexpr double kGainEps = 1e-12;

double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double sum = 0.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / total;
        sum += p * p;
    }
    return 1.0 - sum;
}

int majority_label(const Dataset& data, const std::vector<int>& idx) {
    std::vector<int> counts;
    for (int i : idx) {
        if (data.y[i] >= static_cast<int>(counts.size())) {
            counts.resize(data.y[i] + 1, 0);
        }
        counts[data.y[i]] += 1;
    }
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = static_cast<int>(c);
    }
    return best;  // ties resolve to the lower class code
}

// Recursive Gini-split builder. feature_picker selects the candidate
// feature set for one split (identity for CART, a seeded random subset for
// forest trees); the DFS order pins the rng call sequence.
struct CartBuilder {
    const Dataset& data;
    int num_classes;
    int max_depth;  // 0 = unlimited
    std::function<std::vector<int>()> feature_picker;
    Tree tree;

    int build(std::vector<int> idx, int depth) {
        const int node = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        std::vector<int> counts(num_classes, 0);
        for (int i : idx) counts[data.y[i]] += 1;
        const int total = static_cast<int>(idx.size());
        const double impurity = gini(counts, total);

        const bool depth_capped = max_depth > 0 && depth >= max_depth;
        if (total < 2 || impurity == 0.0 || depth_capped) {
            tree.nodes[node].value = majority_label(data, idx);
            return node;
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;
        const std::vector<int> candidates = feature_picker();
        std::vector<std::pair<double, int>> vals;
        std::vector<int> left_counts(num_classes);
        for (int f : candidates) {
            vals.clear();
            for (int i : idx) vals.emplace_back(data.x[i][f], i);
            std::sort(vals.begin(), vals.end());
            std::fill(left_counts.begin(), left_counts.end(), 0);
            for (int pos = 0; pos < total - 1; ++pos) {
                left_counts[data.y[vals[pos].second]] += 1;
                if (vals[pos + 1].first <= vals[pos].first) continue;
                const int nl = pos + 1;
                const int nr = total - nl;
                std::vector<int> right_counts(num_classes);
                for (int c = 0; c < num_classes; ++c) {
                    right_counts[c] = counts[c] - left_counts[c];
                }
                const double weighted =
                    (nl * gini(left_counts, nl) + nr * gini(right_counts, nr)) /
                    total;
                const double gain = impurity - weighted;
                if (gain > best_gain + kGainEps) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold =
                        0.5 * (vals[pos].first + vals[pos + 1].first);
                }
            }
        }
        if (best_feature < 0) {
            tree.nodes[node].value = majority_label(data, idx);
            return node;
        }

        std::vector<int> left_idx, right_idx;
        for (int i : idx) {
            (data.x[i][best_feature] < best_threshold ? left_idx : right_idx)
                .push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        tree.nodes[node].leaf = false;
        tree.nodes[node].feature = best_feature;
        tree.nodes[node].threshold = best_threshold;
        const int left = build(std::move(left_idx), depth + 1);
        const int right = build(std::move(right_idx), depth + 1);
        tree.nodes[node].left = left;
        tree.nodes[node].right = right;
        return node;
    }
};

}  // namespace

CartState train_cart(const Dataset& data, int max_depth) {
    const int num_classes =
        *std::max_element(data.y.begin(), data.y.end()) + 1;
    const int d = data.dim();
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    CartBuilder builder{data, num_classes, max_depth,
                        [all]() { return all; }, {}};
    std::vector<int> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    builder.build(std::move(idx), 0);
    return CartState{std::move(builder.tree)};
}

ForestState train_forest(const Dataset& data, int n_trees,
                         int features_per_split, bool bootstrap,
                         std::uint64_t seed) {
    const int num_classes =
        *std::max_element(data.y.begin(), data.y.end()) + 1;
    const int n = data.size();
    const int d = data.dim();
    const int per_split = std::min(features_per_split, d);

    ForestState state;
    state.trees.resize(n_trees);
    parallel_for(n_trees, [&](int t) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(t), 0));
        std::vector<int> idx(n);
        if (bootstrap) {
            for (int i = 0; i < n; ++i) {
                idx[i] = static_cast<int>(rng.next_below(n));
            }
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        auto picker = [&rng, d, per_split]() {
            // partial Fisher-Yates, then ascending for a pinned scan order
            std::vector<int> pool(d);
            std::iota(pool.begin(), pool.end(), 0);
            for (int i = 0; i < per_split; ++i) {
                const int j =
                    i + static_cast<int>(rng.next_below(d - i));
                std::swap(pool[i], pool[j]);
            }
            pool.resize(per_split);
            std::sort(pool.begin(), pool.end());
            return pool;
        };
        CartBuilder builder{data, num_classes, 0, picker, {}};
        builder.build(std::move(idx), 0);
        state.trees[t] = std::move(builder.tree);
    });
    return state;
}

}  // namespace pqbench::models
