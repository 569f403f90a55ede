#ifndef BRANCHODE_RNG_HPP
#define BRANCHODE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace branchode {

// splitmix64 step; used to spread seeds and derive sub-streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive a new 64-bit seed from (seed, salt). Chaining calls builds
// hierarchical streams, e.g. mix(mix(seed, patch), grid_index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + salt * 0xd1342543de82ef95ULL);
    return splitmix64(s);
}

// xoshiro256++. Self-contained so that streams keyed by (seed, sample index)
// are cheap to construct and results do not depend on the standard library's
// distribution implementations.
class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    // Independent stream for one Monte Carlo sample. Estimates must not
    // depend on how samples are grouped into chunks or threads, so the
    // stream is keyed by the sample index, never by the chunk index.
    static Rng for_sample(std::uint64_t seed, std::uint64_t sample_index) {
        return Rng(mix_seed(seed, sample_index));
    }

    std::uint64_t next_u64() {
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

    // Uniform in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    // Standard normal via Box-Muller (the cosine branch only; one draw per call
    // keeps stream consumption predictable).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

} // namespace branchode

#endif // BRANCHODE_RNG_HPP
