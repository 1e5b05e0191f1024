#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace tsplab {

/// Counter-based pseudo-random generator. Output i is the splitmix64
/// finalizer applied to key + (i+1)*golden, so the stream is a pure function
/// of (key, counter) and reproduces bit-identically on every platform.
/// Dataset manifests record `Rng::kVersion` next to the seed.
class Rng {
public:
    static constexpr const char* kVersion = "splitmix64-counter/v1";

    explicit Rng(std::uint64_t seed) : key_(seed) {}

    std::uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased uniform integer in [0, bound), bound >= 1.
    std::uint64_t uniform_u64(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    int uniform_int(int lo, int hi_inclusive) {
        return lo + static_cast<int>(uniform_u64(static_cast<std::uint64_t>(hi_inclusive - lo) + 1));
    }

    /// Box-Muller; consumes exactly two outputs per call (no cached spare).
    double gaussian(double mean = 0.0, double sigma = 1.0) {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_u64(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Independent child stream; deterministic function of (key, stream id).
    Rng fork(std::uint64_t stream) const { return Rng(mix64(mix64(key_) ^ (stream + 0x632BE59BD9B4E019ULL))); }

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace tsplab
