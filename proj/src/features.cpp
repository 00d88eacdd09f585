#include "pqbench/features.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pqbench/wavelet.hpp"

namespace pqbench::features {

const std::array<std::string, kNumStats>& stat_names() {
    static const std::array<std::string, kNumStats> names = {
        "mean", "sd", "rms", "energy", "skewness", "kurtosis", "entropy",
        "maxabs"};
    return names;
}

std::string feature_column_name(int index) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "f%03d", index);
    return buf;
}

std::array<double, kNumStats> subband_stats(const std::vector<double>& c) {
    if (c.empty()) {
        throw std::invalid_argument("subband_stats requires a nonempty array");
    }
    const double n = static_cast<double>(c.size());
    double sum = 0.0, sumsq = 0.0, maxabs = 0.0;
    for (double v : c) {
        sum += v;
        sumsq += v * v;
        maxabs = std::max(maxabs, std::abs(v));
    }
    const double mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : c) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double sd = std::sqrt(m2);
    const double rms = std::sqrt(sumsq / n);
    const double energy = sumsq;
    double skew = 0.0, kurt = 0.0;
    if (m2 >= 1e-24) {
        skew = m3 / (m2 * sd);
        kurt = m4 / (m2 * m2);
    }
    double entropy = 0.0;
    if (energy >= 1e-24) {
        for (double v : c) {
            const double p = v * v / energy;
            if (p > 0.0) entropy -= p * std::log(p);
        }
    }
    return {mean, sd, rms, energy, skew, kurt, entropy, maxabs};
}

FeatureVector extract_features(const synth::WaveformRecord& record) {
    FeatureVector out;
    out.label = record.label;
    out.record_id = record.id;
    for (int ch = 0; ch < synth::kNumChannels; ++ch) {
        const wavelet::SubbandSet sub = wavelet::wavedec5(record.samples[ch]);
        for (int band = 0; band < kNumSubbands; ++band) {
            const auto stats = subband_stats(sub.bands[band]);
            for (int s = 0; s < kNumStats; ++s) {
                out.values[feature_index(ch, band, s)] = stats[s];
            }
        }
    }
    for (double v : out.values) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("non-finite feature value");
        }
    }
    return out;
}

std::vector<FeatureVector> extract_features(
    const std::vector<synth::WaveformRecord>& records) {
    std::vector<FeatureVector> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(extract_features(r));
    return out;
}

Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) {
        throw std::invalid_argument("fit_normalizer requires a nonempty set");
    }
    const std::size_t dim = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != dim) {
            throw std::invalid_argument("fit_normalizer: ragged input");
        }
    }
    Normalizer norm;
    norm.mean.resize(dim);
    norm.sd.resize(dim);
    const double n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < dim; ++j) {
        double sum = 0.0;
        for (const auto& r : rows) sum += r[j];
        const double mean = sum / n;
        double var = 0.0;
        for (const auto& r : rows) {
            const double d = r[j] - mean;
            var += d * d;
        }
        norm.mean[j] = mean;
        norm.sd[j] = std::max(std::sqrt(var / n), 1e-12);
    }
    return norm;
}

Normalizer fit_normalizer(const std::vector<FeatureVector>& train) {
    std::vector<std::vector<double>> rows;
    rows.reserve(train.size());
    for (const auto& v : train) {
        rows.emplace_back(v.values.begin(), v.values.end());
    }
    return fit_normalizer(rows);
}

std::vector<double> apply_normalizer(const Normalizer& norm,
                                     const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != norm.dim()) {
        throw std::invalid_argument("apply_normalizer: dimension mismatch");
    }
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        out[j] = (v[j] - norm.mean[j]) / norm.sd[j];
    }
    return out;
}

}  // namespace pqbench::features
