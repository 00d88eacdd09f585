#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pqbench/models.hpp"

namespace pqbench::models {

// ---------------------------------------------------------------------------
// Multinomial logistic regression
// ---------------------------------------------------------------------------

namespace {

// loss = (1/n) sum -log p_{y_i} + (lambda/2) ||W||^2 (biases unpenalized)
double logreg_loss(const Dataset& data, const std::vector<double>& w,
                   int num_classes, double lambda) {
    const int n = data.size();
    const int d = data.dim();
    const int stride = d + 1;
    double loss = 0.0;
    std::vector<double> scores(num_classes);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < num_classes; ++k) {
            const double* row = &w[static_cast<std::size_t>(k) * stride];
            double s = row[d];
            for (int j = 0; j < d; ++j) s += row[j] * data.x[i][j];
            scores[k] = s;
        }
        const double smax = *std::max_element(scores.begin(), scores.end());
        double denom = 0.0;
        for (double s : scores) denom += std::exp(s - smax);
        loss += -(scores[data.y[i]] - smax - std::log(denom));
    }
    loss /= n;
    for (int k = 0; k < num_classes; ++k) {
        for (int j = 0; j < d; ++j) {
            const double v = w[static_cast<std::size_t>(k) * stride + j];
            loss += 0.5 * lambda * v * v;
        }
    }
    return loss;
}

std::vector<double> logreg_gradient(const Dataset& data,
                                    const std::vector<double>& w,
                                    int num_classes, double lambda) {
    const int n = data.size();
    const int d = data.dim();
    const int stride = d + 1;
    std::vector<double> grad(w.size(), 0.0);
    std::vector<double> scores(num_classes);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < num_classes; ++k) {
            const double* row = &w[static_cast<std::size_t>(k) * stride];
            double s = row[d];
            for (int j = 0; j < d; ++j) s += row[j] * data.x[i][j];
            scores[k] = s;
        }
        const double smax = *std::max_element(scores.begin(), scores.end());
        double denom = 0.0;
        for (double s : scores) denom += std::exp(s - smax);
        for (int k = 0; k < num_classes; ++k) {
            const double p = std::exp(scores[k] - smax) / denom;
            const double err = p - (k == data.y[i] ? 1.0 : 0.0);
            double* grow = &grad[static_cast<std::size_t>(k) * stride];
            for (int j = 0; j < d; ++j) grow[j] += err * data.x[i][j];
            grow[d] += err;
        }
    }
    for (double& g : grad) g /= n;
    for (int k = 0; k < num_classes; ++k) {
        for (int j = 0; j < d; ++j) {
            grad[static_cast<std::size_t>(k) * stride + j] +=
                lambda * w[static_cast<std::size_t>(k) * stride + j];
        }
    }
    return grad;
}

}  // namespace

namespace detail {
// exposed for the finite-difference oracle in tests
std::vector<double> logreg_gradient_for_test(const Dataset& data,
                                             const std::vector<double>& w,
                                             int num_classes, double lambda) {
    return logreg_gradient(data, w, num_classes, lambda);
}
double logreg_loss_for_test(const Dataset& data, const std::vector<double>& w,
                            int num_classes, double lambda) {
    return logreg_loss(data, w, num_classes, lambda);
}
}  // namespace detail

LogRegState train_logreg(const Dataset& data, double lambda_reg,
                         int max_iters) {
    const int num_classes =
        *std::max_element(data.y.begin(), data.y.end()) + 1;
    const int d = data.dim();
    const int stride = d + 1;

    LogRegState state;
    state.num_classes = num_classes;
    state.dim = d;
    state.w.assign(static_cast<std::size_t>(num_classes) * stride, 0.0);

    double loss = logreg_loss(data, state.w, num_classes, lambda_reg);
    for (int iter = 0; iter < max_iters; ++iter) {
        const std::vector<double> grad =
            logreg_gradient(data, state.w, num_classes, lambda_reg);
        double gnorm2 = 0.0;
        for (double g : grad) gnorm2 += g * g;
        if (std::sqrt(gnorm2) < 1e-6) break;

        // backtracking line search (Armijo)
        double step = 1.0;
        std::vector<double> trial(state.w.size());
        double trial_loss = loss;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t j = 0; j < state.w.size(); ++j) {
                trial[j] = state.w[j] - step * grad[j];
            }
            trial_loss = logreg_loss(data, trial, num_classes, lambda_reg);
            if (trial_loss <= loss - 1e-4 * step * gnorm2) break;
            step *= 0.5;
        }
        if (trial_loss >= loss) break;  // no further progress
        state.w = trial;
        loss = trial_loss;
    }
    return state;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes
// ---------------------------------------------------------------------------

GnbState train_gnb(const Dataset& data) {
    const int n = data.size();
    const int d = data.dim();

    // overall population variance per feature, for the floor
    double max_var = 0.0;
    for (int j = 0; j < d; ++j) {
        double sum = 0.0;
        for (const auto& row : data.x) sum += row[j];
        const double mean = sum / n;
        double var = 0.0;
        for (const auto& row : data.x) {
            const double dd = row[j] - mean;
            var += dd * dd;
        }
        max_var = std::max(max_var, var / n);
    }
    const double floor = std::max(1e-9 * max_var, 1e-300);

    GnbState state;
    std::vector<int> sorted_classes(data.y.begin(), data.y.end());
    std::sort(sorted_classes.begin(), sorted_classes.end());
    sorted_classes.erase(
        std::unique(sorted_classes.begin(), sorted_classes.end()),
        sorted_classes.end());
    state.classes = sorted_classes;

    for (int cls : state.classes) {
        std::vector<double> mean(d, 0.0), var(d, 0.0);
        int count = 0;
        for (int i = 0; i < n; ++i) {
            if (data.y[i] != cls) continue;
            ++count;
            for (int j = 0; j < d; ++j) mean[j] += data.x[i][j];
        }
        for (int j = 0; j < d; ++j) mean[j] /= count;
        for (int i = 0; i < n; ++i) {
            if (data.y[i] != cls) continue;
            for (int j = 0; j < d; ++j) {
                const double dd = data.x[i][j] - mean[j];
                var[j] += dd * dd;
            }
        }
        for (int j = 0; j < d; ++j) {
            var[j] = std::max(var[j] / count, floor);
        }
        state.log_priors.push_back(std::log(static_cast<double>(count) / n));
        state.means.push_back(std::move(mean));
        state.vars.push_back(std::move(var));
    }
    return state;
}

}  // namespace pqbench::models
