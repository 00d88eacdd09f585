#pragma once

#include <array>
#include <utility>
#include <vector>

namespace pqbench::wavelet {

// Orthonormal 8-tap analysis pair: h low-pass (scaling), g high-pass.
struct WaveletFilters {
    std::array<double, 8> h;
    std::array<double, 8> g;
};

// Daubechies filter with 4 vanishing moments (db4). Self-checks the
// orthonormality and moment conditions on first use and throws on a
// transcription error.
const WaveletFilters& db4_filters();

// Whole-sample symmetric extension of a 1000-sample signal to 1024:
// 12 mirrored samples on each side.
std::vector<double> pad_to_1024(const std::vector<double>& x);

// One periodized convolution-decimation step:
//   a[k] = sum_m h[m] x[(2k+m) mod 2n],  d[k] likewise with g.
std::pair<std::vector<double>, std::vector<double>> analysis_step(
    const std::vector<double>& x, const WaveletFilters& filters);

// D1..D5 detail and A5 approximation coefficients of the padded signal.
struct SubbandSet {
    std::array<std::vector<double>, 6> bands;  // D1 D2 D3 D4 D5 A5

    const std::vector<double>& d(int level) const { return bands[level - 1]; }
    const std::vector<double>& a5() const { return bands[5]; }
};

inline constexpr std::array<int, 6> kSubbandLengths = {512, 256, 128,
                                                       64,  32,  32};

SubbandSet wavedec5(const std::vector<double>& x);

}  // namespace pqbench::wavelet
