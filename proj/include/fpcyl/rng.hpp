// rng.hpp — counter-derived random streams (splitmix64 keying, xoshiro256++ core).
//
// Every replicate owns one stream, derived from (master_seed, stream_id).
// Derivation is pure: the same pair always yields the same sequence, and
// distinct ids yield distinct sequences, so parallel runs are reproducible
// independent of execution order.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fpcyl {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class RngStream {
public:
    RngStream() = default;

    static RngStream derive(std::uint64_t master_seed, std::uint64_t stream_id) {
        // Two splitmix passes decorrelate adjacent (seed, id) pairs.
        std::uint64_t key = master_seed;
        std::uint64_t a = detail::splitmix64(key);
        key ^= stream_id * 0xda942042e4dd58b5ULL;
        std::uint64_t b = detail::splitmix64(key);
        std::uint64_t st = a ^ detail::rotl(b, 23);
        RngStream r;
        for (auto& w : r.s_) w = detail::splitmix64(st);
        return r;
    }

    // Tagged substream, e.g. one per window-enlargement round.
    static RngStream derive_sub(std::uint64_t master_seed, std::uint64_t stream_id,
                                std::uint64_t tag) {
        std::uint64_t mixed = stream_id ^ detail::rotl(tag + 0x632be59bd9b4e019ULL, 32);
        return derive(master_seed ^ 0x9e6c63d0876a9f7bULL, mixed);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    // One Box-Muller draw; the sine branch is discarded to keep the stream
    // state a pure function of the number of calls.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    bool operator==(const RngStream& other) const { return s_ == other.s_; }

private:
    std::array<std::uint64_t, 4> s_{1, 2, 3, 4};
};

}  // namespace fpcyl
