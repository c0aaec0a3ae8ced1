#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace specmatch {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ seeded through splitmix64. Every stochastic stage of the
// pipeline draws from this generator instead of std:: distributions, whose
// output is implementation-defined; runs are therefore reproducible
// bit-for-bit across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform index in [0, n). n must be nonzero.
    std::size_t index(std::size_t n) {
        auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached so the draw sequence stays deterministic.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Derives a sub-seed for a named pipeline stage from the run seed, so
    // one master seed governs every stochastic stage independently.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
        return splitmix64(s);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Fixed stream tags for Rng::derive. One run seed plus these offsets covers
// all stochastic stages of a detection run.
namespace seed_stream {
inline constexpr std::uint64_t kScene = 1;
inline constexpr std::uint64_t kKmeansTarget = 2;
inline constexpr std::uint64_t kKmeansBackground = 3;
inline constexpr std::uint64_t kParamInit = 4;
inline constexpr std::uint64_t kPretext = 5;
inline constexpr std::uint64_t kNPair = 6;
inline constexpr std::uint64_t kGradCheck = 7;
inline constexpr std::uint64_t kEndmember = 8;
}  // namespace seed_stream

}  // namespace specmatch
