#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace rmdyn {

/// Random stream owned by one trial.
using Stream = std::mt19937_64;

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Per-trial seed: mix64(master ^ (index * 0x9E3779B97F4A7C15)).
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
    return mix64(master_seed ^ (trial_index * kGoldenGamma));
}

Stream make_stream(std::uint64_t master_seed, std::uint64_t trial_index);

/// Standard complex normal: real and imaginary parts N(0, 1/2).
struct ComplexNormal {
    std::normal_distribution<double> normal{0.0, 1.0};
    template <typename G>
    std::complex<double> operator()(G& g) {
        constexpr double r = 0.70710678118654752440;
        const double re = normal(g);
        const double im = normal(g);
        return {r * re, r * im};
    }
};

}  // namespace rmdyn
