// rng.hpp
// Deterministic RNG streams for seeded Monte Carlo runs.
//
// Streams are splitmix64 generators (Steele, Lea & Flood). A stream is
// derived from a (seed, index) pair through the same avalanche permutation,
// so trial i of a run draws from stream derive(seed, i) regardless of how
// trials are scheduled across workers. All state is local; there is no
// global generator.

#pragma once

#include <cstdint>

namespace entsim {

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    // Counter-based stream derivation: avalanche the trial index into the
    // seed so that consecutive indices yield unrelated streams.
    static RngStream derive(std::uint64_t seed, std::uint64_t index) {
        return RngStream(mix(seed ^ mix(index + 0x9E3779B97F4A7C15ull)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_double() < p; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace entsim
