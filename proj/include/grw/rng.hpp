#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace grw {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the index-th stream of a master seed: the splitmix64 output at
/// position `index`, computed in O(1). Streams for distinct indices are
/// decorrelated, so ensemble results do not depend on scheduling order.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master + 0x9e3779b97f4a7c15ULL * index;
    return splitmix64(s);
}

/// Deterministic random stream. All samplers are hand-rolled on top of the
/// raw 64-bit output so the consumed sequence is fixed by this code alone,
/// not by the standard library's distribution implementations. The engine
/// state is filled from a splitmix64 expansion of the seed; single-word
/// seeding leaves most of the Mersenne state poorly mixed early on.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(make_engine(seed)) {}

    static RandomStream substream(std::uint64_t master, std::uint64_t index) {
        return RandomStream(substream_seed(master, index));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, bound) by rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::domain_error("uniform_below: bound == 0");
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

    /// Exponential inter-arrival time; rate > 0.
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

    /// Standard normal via Box-Muller (cosine branch, 2 uniforms per draw).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

private:
    struct SplitmixSeq {
        using result_type = std::uint32_t;
        std::uint64_t state;
        template <class It>
        void generate(It begin, It end) {
            for (It it = begin; it != end; ++it) {
                *it = static_cast<std::uint32_t>(splitmix64(state));
            }
        }
    };

    static std::mt19937_64 make_engine(std::uint64_t seed) {
        SplitmixSeq seq{seed};
        return std::mt19937_64(seq);
    }

    std::mt19937_64 engine_;
};

}  // namespace grw
