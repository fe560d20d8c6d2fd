#ifndef CDFOREST_RNG_HPP
#define CDFOREST_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace cdforest {

// xoshiro256++ generator (Blackman & Vigna), seeded through splitmix64.
// Substreams are derived by hashing (seed, stream ids) rather than by
// jumping, so any (forest, tree) or (benchmark, replication) pair owns an
// independent stream that does not depend on evaluation order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_a,
                             std::uint64_t stream_b = 0) {
        std::uint64_t s = seed;
        s = splitmix64(s) ^ (stream_a + 0x9e3779b97f4a7c15ULL);
        s = splitmix64(s) ^ (stream_b + 0x9e3779b97f4a7c15ULL);
        return splitmix64(s);
    }

    // Independent generator for substream (stream_a, stream_b) of `seed`.
    static Rng substream(std::uint64_t seed, std::uint64_t stream_a,
                         std::uint64_t stream_b = 0) {
        return Rng(mix(seed, stream_a, stream_b));
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

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased uniform integer in [0, bound). Lemire's multiply-reject method.
    std::uint64_t uniform_below(std::uint64_t bound) {
        using u128 = unsigned __int128;
        std::uint64_t x = next_u64();
        u128 m = static_cast<u128>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<u128>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& s) {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

// Gaussian via Marsaglia's polar method; keeps the spare deviate.
class NormalSampler {
public:
    double operator()(Rng& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * rng.next_double() - 1.0;
            v = 2.0 * rng.next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double r = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * r;
        has_spare_ = true;
        return u * r;
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cdforest

#endif  // CDFOREST_RNG_HPP
