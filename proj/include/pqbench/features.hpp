#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pqbench/synth.hpp"

namespace pqbench::features {

inline constexpr int kNumStats = 8;
inline constexpr int kNumSubbands = 6;
inline constexpr int kFeatureDim =
    synth::kNumChannels * kNumSubbands * kNumStats;  // 288

// Statistic order within each (channel, subband) block.
const std::array<std::string, kNumStats>& stat_names();

struct FeatureVector {
    std::array<double, kFeatureDim> values{};
    synth::EventClass label = synth::EventClass::AG;
    std::int64_t record_id = 0;
};

// Feature index for (channel, subband, stat); channels [Va Vb Vc Ia Ib Ic],
// subbands [D1..D5 A5].
inline int feature_index(int channel, int subband, int stat) {
    return channel * (kNumSubbands * kNumStats) + subband * kNumStats + stat;
}

// Canonical column name, e.g. f037.
std::string feature_column_name(int index);

// The eight per-subband statistics:
// mean, sd, rms, energy, skewness, kurtosis (normal -> 3),
// Shannon entropy over normalized squared coefficients (natural log),
// max absolute coefficient. Population (1/n) moments throughout; skew and
// kurtosis are 0 when m2 < 1e-24, entropy is 0 when energy < 1e-24.
std::array<double, kNumStats> subband_stats(const std::vector<double>& c);

FeatureVector extract_features(const synth::WaveformRecord& record);

std::vector<FeatureVector> extract_features(
    const std::vector<synth::WaveformRecord>& records);

// Per-feature z-score transform fitted on the training split only.
// Dynamic dimension so the model suite can reuse it on toy problems.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> sd;  // population, floored at 1e-12

    int dim() const { return static_cast<int>(mean.size()); }
};

Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows);
Normalizer fit_normalizer(const std::vector<FeatureVector>& train);

std::vector<double> apply_normalizer(const Normalizer& norm,
                                     const std::vector<double>& v);

}  // namespace pqbench::features
