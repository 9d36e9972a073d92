#pragma once

#include <cstdint>
#include <random>

namespace randpol {

/// Seeded random stream with pure substream derivation.
///
/// `child(i)` depends only on the parent's key and `i`, never on how many
/// draws the parent has made. Parallel work assigns substream index = work
/// item index, which makes results independent of the thread count.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix(seed)), engine_(key_) {}

    Rng child(std::uint64_t index) const { return Rng(key_ ^ mix(index + 0x632be59bd9b4e019ULL), Raw{}); }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) {
        if (lo == hi) return lo;
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }
    std::uint64_t key() const { return key_; }

    // splitmix64 finalizer
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    struct Raw {};
    Rng(std::uint64_t key, Raw) : key_(mix(key)), engine_(key_) {}

    std::uint64_t key_;
    std::mt19937_64 engine_;
};

}  // namespace randpol
