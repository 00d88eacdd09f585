#include "pqbench/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace pqbench::wavelet {

namespace {

// Scaling coefficients of the 8-tap Daubechies filter with 4 vanishing
// moments, computed by spectral factorization to 22 significant digits.
constexpr std::array<double, 8> kDb4LowPass = {
    0.2303778133088965009,   0.7148465705529156471,
    0.6308807679298589079,   -0.02798376941685985421,
    -0.1870348117190930841,  0.03084138183556076363,
    0.03288301166688519974,  -0.01059740178506903210,
};

WaveletFilters make_db4() {
    WaveletFilters f;
    f.h = kDb4LowPass;
    for (int k = 0; k < 8; ++k) {
        f.g[k] = ((k % 2 == 0) ? 1.0 : -1.0) * f.h[7 - k];
    }
    // Self-check against transcription mistakes.
    double sum = 0.0, norm = 0.0;
    for (double v : f.h) {
        sum += v;
        norm += v * v;
    }
    if (std::abs(sum - std::sqrt(2.0)) > 1e-12 || std::abs(norm - 1.0) > 1e-12) {
        throw std::runtime_error("db4 filter failed normalization check");
    }
    for (int m = 1; m <= 3; ++m) {
        double dot = 0.0;
        for (int k = 0; k + 2 * m < 8; ++k) dot += f.h[k] * f.h[k + 2 * m];
        if (std::abs(dot) > 1e-12) {
            throw std::runtime_error("db4 filter failed orthogonality check");
        }
    }
    for (int p = 0; p <= 3; ++p) {
        double mom = 0.0;
        for (int k = 0; k < 8; ++k) {
            mom += ((k % 2 == 0) ? 1.0 : -1.0) * std::pow(k, p) * f.h[k];
        }
        if (std::abs(mom) > 1e-10) {
            throw std::runtime_error("db4 filter failed vanishing-moment check");
        }
    }
    return f;
}

}  // namespace

const WaveletFilters& db4_filters() {
    static const WaveletFilters filters = make_db4();
    return filters;
}

std::vector<double> pad_to_1024(const std::vector<double>& x) {
    if (x.size() != 1000) {
        throw std::invalid_argument("pad_to_1024 expects exactly 1000 samples");
    }
    std::vector<double> out;
    out.reserve(1024);
    for (int k = 12; k >= 1; --k) out.push_back(x[k]);
    out.insert(out.end(), x.begin(), x.end());
    for (int k = 998; k >= 987; --k) out.push_back(x[k]);
    return out;
}

std::pair<std::vector<double>, std::vector<double>> analysis_step(
    const std::vector<double>& x, const WaveletFilters& filters) {
    const std::size_t len = x.size();
    if (len < 8 || len % 2 != 0) {
        throw std::invalid_argument(
            "analysis_step expects an even input length >= 8");
    }
    const std::size_t n = len / 2;
    std::vector<double> a(n), d(n);
    for (std::size_t k = 0; k < n; ++k) {
        double sa = 0.0, sd = 0.0;
        for (int m = 0; m < 8; ++m) {
            const double v = x[(2 * k + m) % len];
            sa += filters.h[m] * v;
            sd += filters.g[m] * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    return {std::move(a), std::move(d)};
}

SubbandSet wavedec5(const std::vector<double>& x) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("wavedec5 requires finite input");
        }
    }
    const WaveletFilters& f = db4_filters();
    SubbandSet out;
    std::vector<double> approx = pad_to_1024(x);
    for (int level = 0; level < 5; ++level) {
        auto [a, d] = analysis_step(approx, f);
        out.bands[level] = std::move(d);
        approx = std::move(a);
    }
    out.bands[5] = std::move(approx);
    return out;
}

}  // namespace pqbench::wavelet
