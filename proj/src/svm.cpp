#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pqbench/models.hpp"
#include "pqbench/parallel.hpp"

namespace pqbench::models {

namespace {

double dual_objective(const std::vector<double>& kmat,
                      const std::vector<int>& y,
                      const std::vector<double>& alpha) {
    const int n = static_cast<int>(y.size());
    double obj = 0.0;
    for (int i = 0; i < n; ++i) obj += alpha[i];
    double quad = 0.0;
    for (int i = 0; i < n; ++i) {
        if (alpha[i] == 0.0) continue;
        const double ayi = alpha[i] * y[i];
        for (int j = 0; j < n; ++j) {
            if (alpha[j] == 0.0) continue;
            quad += ayi * alpha[j] * y[j] * kmat[i * n + j];
        }
    }
    return obj - 0.5 * quad;
}

struct SmoSolver {
    const std::vector<double>& kmat;
    const std::vector<int>& y;
    const double c;
    const double tol;
    const int n;
    std::vector<double> alpha;
    std::vector<double> error;  // f(i) - y_i, maintained incrementally
    double b = 0.0;
    static constexpr double kEps = 1e-12;

    SmoSolver(const std::vector<double>& kmat_, const std::vector<int>& y_,
              double c_, double tol_)
        : kmat(kmat_), y(y_), c(c_), tol(tol_),
          n(static_cast<int>(y_.size())), alpha(n, 0.0), error(n) {
        for (int i = 0; i < n; ++i) error[i] = -y[i];  // f = 0 initially
    }

    bool take_step(int i1, int i2) {
        if (i1 == i2) return false;
        const double a1 = alpha[i1], a2 = alpha[i2];
        const int y1 = y[i1], y2 = y[i2];
        const double e1 = error[i1], e2 = error[i2];
        const double s = y1 * y2;
        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c, c + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c);
            hi = std::min(c, a1 + a2);
        }
        if (lo >= hi) return false;
        const double k11 = kmat[i1 * n + i1];
        const double k12 = kmat[i1 * n + i2];
        const double k22 = kmat[i2 * n + i2];
        const double eta = k11 + k22 - 2.0 * k12;
        double a2new;
        if (eta > 0.0) {
            a2new = a2 + y2 * (e1 - e2) / eta;
            a2new = std::clamp(a2new, lo, hi);
        } else {
            // flat direction: evaluate the objective at both clip ends
            const double f1 = y1 * (e1 - b) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 - b) - a2 * k22 - s * a1 * k12;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                                  0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                                  0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (obj_lo < obj_hi - kEps) {
                a2new = lo;
            } else if (obj_lo > obj_hi + kEps) {
                a2new = hi;
            } else {
                a2new = a2;
            }
        }
        if (std::abs(a2new - a2) < kEps * (a2new + a2 + kEps)) return false;
        const double a1new = a1 + s * (a2 - a2new);

        // bias update (Platt's b1/b2 rule, f = sum + b convention)
        const double d1 = y1 * (a1new - a1);
        const double d2 = y2 * (a2new - a2);
        const double b1 = b - e1 - d1 * k11 - d2 * k12;
        const double b2 = b - e2 - d1 * k12 - d2 * k22;
        double bnew;
        if (a1new > 0.0 && a1new < c) {
            bnew = b1;
        } else if (a2new > 0.0 && a2new < c) {
            bnew = b2;
        } else {
            bnew = 0.5 * (b1 + b2);
        }
        const double db = bnew - b;
        b = bnew;
        for (int i = 0; i < n; ++i) {
            error[i] += d1 * kmat[i1 * n + i] + d2 * kmat[i2 * n + i] + db;
        }
        alpha[i1] = a1new;
        alpha[i2] = a2new;
        error[i1] = f_of(i1) - y1;
        error[i2] = f_of(i2) - y2;
        return true;
    }

    double f_of(int i) const {
        double f = b;
        for (int j = 0; j < n; ++j) {
            if (alpha[j] != 0.0) f += alpha[j] * y[j] * kmat[j * n + i];
        }
        return f;
    }

    bool examine(int i2) {
        const double a2 = alpha[i2];
        const double e2 = error[i2];
        const double r2 = e2 * y[i2];
        const bool violates = (r2 < -tol && a2 < c) || (r2 > tol && a2 > 0.0);
        if (!violates) return false;
        // second-choice heuristic: maximize |e1 - e2| over non-bound points
        int best = -1;
        double best_gap = -1.0;
        for (int i = 0; i < n; ++i) {
            if (alpha[i] > 0.0 && alpha[i] < c) {
                const double gap = std::abs(error[i] - e2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
        }
        if (best >= 0 && take_step(best, i2)) return true;
        for (int i = 0; i < n; ++i) {
            if (alpha[i] > 0.0 && alpha[i] < c && take_step(i, i2)) return true;
        }
        for (int i = 0; i < n; ++i) {
            if (take_step(i, i2)) return true;
        }
        return false;
    }

    double worst_violation() const {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double yf = y[i] * (error[i] + y[i]);  // y_i f(x_i)
            double v = 0.0;
            if (alpha[i] <= 0.0) {
                v = std::max(0.0, 1.0 - yf);
            } else if (alpha[i] >= c) {
                v = std::max(0.0, yf - 1.0);
            } else {
                v = std::abs(yf - 1.0);
            }
            worst = std::max(worst, v);
        }
        return worst;
    }
};

}  // namespace

SmoResult smo_binary(const std::vector<double>& kmat, const std::vector<int>& y,
                     double c, double tol, int max_sweeps) {
    const int n = static_cast<int>(y.size());
    if (n < 2) throw std::invalid_argument("smo_binary needs >= 2 samples");
    if (static_cast<int>(kmat.size()) != n * n) {
        throw std::invalid_argument("smo_binary: kernel matrix shape mismatch");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("smo_binary: tol must be > 0");
    for (int v : y) {
        if (v != 1 && v != -1) {
            throw std::invalid_argument("smo_binary labels must be +1/-1");
        }
    }

    // Solve against a tighter internal tolerance so that the final residual,
    // recomputed with exact errors and the averaged bias, stays within tol.
    SmoSolver solver(kmat, y, c, 0.5 * tol);
    SmoResult result;
    bool examine_all = true;
    int changed = 0;
    int passes = 0;
    while (changed > 0 || examine_all) {
        if (++passes > max_sweeps) {
            throw std::runtime_error(
                "SMO failed to converge; worst KKT violation " +
                std::to_string(solver.worst_violation()));
        }
        changed = 0;
        for (int i = 0; i < n; ++i) {
            if (examine_all ||
                (solver.alpha[i] > 0.0 && solver.alpha[i] < c)) {
                changed += solver.examine(i) ? 1 : 0;
            }
        }
        result.objective_per_pass.push_back(
            dual_objective(kmat, y, solver.alpha));
        if (examine_all) {
            examine_all = false;
        } else if (changed == 0) {
            examine_all = true;
        }
    }

    // Polish against exact errors: the incremental error cache drifts by a
    // few ulps per update, which can leave a residual marginally above tol.
    for (int refine = 0; refine < 50; ++refine) {
        for (int i = 0; i < n; ++i) solver.error[i] = solver.f_of(i) - y[i];
        if (solver.worst_violation() <= 0.5 * tol) break;
        int polished = 0;
        for (int i = 0; i < n; ++i) polished += solver.examine(i) ? 1 : 0;
        if (polished == 0) break;
        if (++passes > max_sweeps) {
            throw std::runtime_error(
                "SMO failed to converge; worst KKT violation " +
                std::to_string(solver.worst_violation()));
        }
    }
    // snap round-off past the box bounds back onto them
    for (double& a : solver.alpha) {
        if (a < 0.0) a = 0.0;
        if (a > c) a = c;
    }

    // bias from the average over free support vectors
    double bias_sum = 0.0;
    int free_count = 0;
    for (int i = 0; i < n; ++i) {
        if (solver.alpha[i] > 0.0 && solver.alpha[i] < c) {
            double f = 0.0;
            for (int j = 0; j < n; ++j) {
                if (solver.alpha[j] != 0.0) {
                    f += solver.alpha[j] * y[j] * kmat[j * n + i];
                }
            }
            bias_sum += y[i] - f;
            ++free_count;
        }
    }
    result.bias = free_count > 0 ? bias_sum / free_count : solver.b;
    result.alpha = std::move(solver.alpha);
    result.passes = passes;

    // final KKT residual under the reported bias
    {
        SmoSolver check(kmat, y, c, tol);
        check.alpha = result.alpha;
        check.b = result.bias;
        for (int i = 0; i < n; ++i) check.error[i] = check.f_of(i) - y[i];
        result.worst_kkt = check.worst_violation();
    }
    return result;
}

namespace detail {

SvmState train_svm(const Dataset& data, KernelKind kind, double c, double gamma,
                   double tol, int max_sweeps) {
    SvmState state;
    state.kernel = kind;
    state.gamma = gamma;
    const std::set<int> present(data.y.begin(), data.y.end());
    state.classes.assign(present.begin(), present.end());
    const int nc = static_cast<int>(state.classes.size());

    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < nc; ++a) {
        for (int b = a + 1; b < nc; ++b) pairs.emplace_back(a, b);
    }
    state.machines.resize(pairs.size());

    parallel_for(static_cast<int>(pairs.size()), [&](int pi) {
        const int ca = state.classes[pairs[pi].first];
        const int cb = state.classes[pairs[pi].second];
        std::vector<int> idx;
        std::vector<int> y;
        for (int i = 0; i < data.size(); ++i) {
            if (data.y[i] == ca || data.y[i] == cb) {
                idx.push_back(i);
                y.push_back(data.y[i] == ca ? 1 : -1);
            }
        }
        const int m = static_cast<int>(idx.size());
        std::vector<double> kmat(static_cast<std::size_t>(m) * m);
        for (int i = 0; i < m; ++i) {
            for (int j = i; j < m; ++j) {
                const double v =
                    kernel(kind, data.x[idx[i]], data.x[idx[j]], gamma);
                kmat[i * m + j] = v;
                kmat[j * m + i] = v;
            }
        }
        const SmoResult sol = smo_binary(kmat, y, c, tol, max_sweeps);
        SvmMachine machine;
        machine.class_a = ca;
        machine.class_b = cb;
        machine.bias = sol.bias;
        for (int i = 0; i < m; ++i) {
            if (sol.alpha[i] > 0.0) {
                machine.alpha_y.push_back(sol.alpha[i] * y[i]);
                machine.vectors.push_back(data.x[idx[i]]);
            }
        }
        state.machines[pi] = std::move(machine);
    });
    return state;
}

KnnState train_knn(const Dataset& data, int k) {
    KnnState st;
    st.k = k;
    st.x = data.x;
    st.y = data.y;
    return st;
}

}  // namespace detail

}  // namespace pqbench::models
