#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace crowdteach {

/// SplitMix64 finalizer. Used to derive independent stream seeds so that
/// per-learner / per-run randomness does not depend on scheduling order.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for stream `stream` of a computation seeded with `master`.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::uint64_t stream) noexcept {
    return mix_seed(mix_seed(master) ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

/// Seeded random source. Thin wrapper over mt19937_64 so every component
/// draws through the same handful of primitives.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    /// Draws an index with probability proportional to `probabilities`
    /// (expected to be normalized; the last index absorbs rounding slack).
    std::size_t categorical(std::span<const double> probabilities);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace crowdteach
