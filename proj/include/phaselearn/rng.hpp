// rng.hpp - reproducible random streams.
//
// One root seed; every oracle and every experiment trial derives an
// independent stream by counter-based splitting, so trial order and worker
// count never change the drawn numbers. All sampling is hand-rolled on top of
// raw 64-bit outputs to stay bit-exact across platforms and standard
// libraries.
#pragma once

#include <cmath>
#include <cstdint>

namespace phaselearn {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256** seeded via splitmix64.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t root_seed, std::uint64_t stream_id) {
        std::uint64_t st = root_seed ^ (0x9E3779B97F4A7C15ull * (stream_id + 1));
        for (auto& si : s_) si = splitmix64(st);
    }

    std::uint64_t next() {
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, bound), bound >= 1. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        if ((bound & (bound - 1)) == 0) return next() & (bound - 1);
        std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % bound;
        std::uint64_t v;
        do { v = next(); } while (v >= limit);
        return v % bound;
    }

    std::uint64_t bits(int k) { return k == 64 ? next() : (next() >> (64 - k)); }
    int bit() { return int(next() >> 63); }
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double normal() {
        // Box-Muller; one value per call keeps replay simple.
        double u1, u2;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Derive an independent child stream (used by apply_correction and the
    // trial fan-out). Consumes nothing from this stream's output sequence.
    RngStream spawn() {
        RngStream child;
        std::uint64_t st = s_[0] ^ rotl(s_[2], 13) ^ (0xD1B54A32D192ED03ull * (++spawn_count_));
        for (auto& si : child.s_) si = splitmix64(st);
        return child;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
    std::uint64_t spawn_count_ = 0;
};

}  // namespace phaselearn
