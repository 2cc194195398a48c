#pragma once

#include <cmath>
#include <cstdint>

namespace gw {

// SplitMix64 step; used for seed derivation and for seeding Rng state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Splittable sub-seed for stream/replica (a, b) under a global seed.
// Distinct (seed, a, b) triples give independent-looking seeds, so replica
// results do not depend on scheduling or thread count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s = h ^ (a + 0x9e3779b97f4a7c15ULL);
    h = splitmix64(s);
    s = h ^ (b + 0x7f4a7c159e3779b9ULL);
    return splitmix64(s);
}

// xoshiro256++ (Blackman-Vigna), state seeded via SplitMix64. Chosen over
// std::mt19937_64 because simulations construct thousands of per-stream
// generators per second and the 2.5 KB Mersenne state makes seeding the
// dominant cost; output sequences are fully pinned by this header, so runs
// replay bit-identically.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t st = seed;
        for (auto& w : s_) w = splitmix64(st);
    }

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ULL; }

    std::uint64_t operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

// Uniform in [0,1) with the top 53 bits; avoids std::uniform_real_distribution,
// whose output sequence is implementation-defined.
template <class G>
double u01(G& g) {
    return double(g() >> 11) * 0x1.0p-53;
}

// Exponential inter-event gap by inversion; log1p keeps precision near u=0.
template <class G>
double exp_gap(G& g, double rate) {
    return -std::log1p(-u01(g)) / rate;
}

}  // namespace gw
