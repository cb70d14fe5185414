#pragma once

// Counter-derived random streams for reproducible parallel Monte Carlo.
// Every batch gets its own generator seeded from (master seed, scenario id,
// batch index), so merged results do not depend on worker count or schedule.

#include <cstdint>
#include <string_view>

namespace fwm {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

class Xoshiro256StarStar {
public:
    explicit Xoshiro256StarStar(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in (0,1); never returns 0 so log() stays finite.
    double uniform() {
        double u;
        do {
            u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        } while (u == 0.0);
        return u;
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint32_t binomial(std::uint32_t n, double p) {
        std::uint32_t k = 0;
        for (std::uint32_t i = 0; i < n; ++i) k += bernoulli(p);
        return k;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

inline Xoshiro256StarStar make_stream(std::uint64_t master_seed, std::uint64_t scenario_id,
                                      std::uint64_t batch_index) {
    std::uint64_t h = master_seed;
    (void)splitmix64_next(h);
    h ^= scenario_id;
    (void)splitmix64_next(h);
    h ^= batch_index;
    std::uint64_t mixed = splitmix64_next(h);
    return Xoshiro256StarStar(mixed);
}

}  // namespace fwm
