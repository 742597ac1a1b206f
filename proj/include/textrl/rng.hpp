#pragma once

#include <cstdint>
#include <string_view>

namespace textrl {

// xoshiro256++ with splitmix64 seeding. Self-contained so that seeded runs
// reproduce bit-identically on any platform, independent of the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection-free Lemire reduction.
    uint64_t uniform_index(uint64_t n) {
        const auto wide = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<uint64_t>(wide >> 64);
    }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4]{};
};

// FNV-1a over a label, folded with the base seed and an index. Used to derive
// independent, reproducible streams per (experiment seed, game name, episode).
inline uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t index = 0) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    uint64_t x = base;
    uint64_t mixed = Rng::splitmix64(x) ^ h;
    mixed += 0x9e3779b97f4a7c15ULL * (index + 1);
    return Rng::splitmix64(mixed);
}

} // namespace textrl
