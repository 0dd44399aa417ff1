#pragma once

#include <cmath>
#include <cstdint>

namespace fraclife {

// Hash-seeded splitmix64 substream.  Distinct (seed, stream) pairs are
// decorrelated by two avalanche mixes, so simulations can key one stream per
// path index and aggregate deterministically under any worker count.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(seed + 0x9E3779B97F4A7C15ull) ^
                 mix(stream * 0xBF58476D1CE4E5B9ull + 0x94D049BB133111EBull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform on the open interval (0, 1): 53 random bits offset by half an ulp.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// Exponential(1) draw; strictly positive and finite.
    double next_exponential() { return -std::log(next_uniform()); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace fraclife
