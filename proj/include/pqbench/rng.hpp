#pragma once

#include <cstdint>

namespace pqbench {

// splitmix64: the fixed generator behind every stochastic choice in the
// toolkit. Pinned so reruns are bit-exact across platforms and versions.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        return next() % n;
    }

private:
    std::uint64_t state_;
};

// One-way mix used to derive independent stream seeds from component keys.
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stream seed for (master, a, b); used for per-record and per-tree streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
    std::uint64_t s = mix64(master ^ 0xD6E8FEB86659FD93ull);
    s = mix64(s ^ (a * 0x9E3779B97F4A7C15ull));
    s = mix64(s ^ (b * 0xC2B2AE3D27D4EB4Full));
    return s;
}

}  // namespace pqbench
