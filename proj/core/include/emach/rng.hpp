#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace emach {

// splitmix64 (Steele/Lea/Flood); used for seeding and for deriving
// independent child streams from (seed, salt) pairs.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ (Blackman/Vigna) with explicit uniform/normal draws.
// All randomness in this project flows through this class so that
// streams are bit-reproducible across platforms and standard-library
// versions; std::*_distribution is never used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        SplitMix64 sm{seed};
        for (auto& word : state_) word = sm.next();
    }

    std::uint64_t next_u64() {
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

    // Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; consumes exactly two uniforms per draw.
    double normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n). Plain modulo; the bias of 2^-64 * n is
    // far below anything observable here.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Independent stream derived from this stream's seed and a salt.
    // child(a) == child(a) regardless of how much the parent has advanced.
    Rng child(std::uint64_t salt) const {
        SplitMix64 sm{seed_ ^ (0x9e3779b97f4a7c15ULL * (salt + 1))};
        return Rng(sm.next());
    }

    std::uint64_t seed() const { return seed_; }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
};

}  // namespace emach
