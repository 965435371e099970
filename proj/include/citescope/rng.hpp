#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace citescope {

// Deterministic PRNG (xoshiro256** seeded via splitmix64). The standard
// <random> distributions are not bit-stable across library implementations,
// so uniform and normal draws are implemented here directly; every emitted
// number is a pure function of the seed.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    // Uniform in [0, 1), 53-bit resolution.
    double next_unit();
    // Standard normal via Box-Muller; the paired draw is cached.
    double next_normal();
    // Uniform in [0, n), rejection-sampled so all values are equally likely.
    uint64_t next_below(uint64_t n);

private:
    uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64 finalizer; the mixing primitive behind seed derivation.
uint64_t mix64(uint64_t x);

// Order-sensitive combination of values into one seed, used to derive
// independent per-(cell, cutoff) streams from a base seed.
uint64_t stable_mix(std::initializer_list<uint64_t> parts);

// FNV-1a over bytes; stable across platforms and runs.
uint64_t fnv1a64(std::string_view bytes);

}  // namespace citescope
