#pragma once

#include <cstdint>
#include <random>

namespace iqp {

/// Every stochastic operation takes an explicit 64-bit seed. Independent
/// streams are split off a master seed by hashing (seed, stream, index)
/// through SplitMix64, and each stream drives its own mt19937_64. Results are
/// therefore reproducible bit-for-bit and independent of thread count.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream tags; values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    Observables = 1,
    ZSamples = 2,
    Init = 3,
    DataMinibatch = 4,
    Repetition = 5,
    ModelSamples = 6,
    Subsample = 7,
    Mcmc = 8,
    Graph = 9,
    Split = 10,
    Witness = 11,
    Couplings = 12,
    Blobs = 13,
    GridCell = 14,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return splitmix64(h ^ (index * 0xD1B54A32D192ED03ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }
inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
    return Rng(derive_seed(seed, stream, index));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Uniform integer in [0, n) by rejection (no modulo bias).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

/// Standard normal via Box-Muller; portable across standard libraries.
double standard_normal(Rng& rng);

}  // namespace iqp
