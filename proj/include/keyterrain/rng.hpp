#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace keyterrain {

/// SplitMix64 finalizer. Used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t x);

/// Sub-seed for stream `stream` of `seed`: mix64(seed + 0x9E3779B97F4A7C15 * (stream + 1)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator. Wraps mt19937_64 (whose output sequence is fixed by the
/// standard) with distribution code of our own, so results do not depend on
/// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform();

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n);

    double exponential(double mean);

    /// First `k` entries of a seeded Fisher-Yates shuffle of `pool`.
    template <typename T>
    std::vector<T> sample(std::span<const T> pool, std::size_t k) {
        std::vector<T> v(pool.begin(), pool.end());
        for (std::size_t i = 0; i < k && i < v.size(); ++i) {
            std::size_t j = i + index(v.size() - i);
            std::swap(v[i], v[j]);
        }
        v.resize(std::min(k, v.size()));
        return v;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace keyterrain
