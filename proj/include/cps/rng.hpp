#pragma once

#include <cstdint>
#include <random>

namespace cps {

// Derives an independent stream seed from a base seed and a stream index.
// Stable across platforms.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Deterministic random source. All continuous draws are inverse-CDF
// transforms of a 53-bit uniform taken from mt19937_64, so sequences are
// reproducible across platforms and standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Strictly inside (0, 1).
    double uniform01();

    double normal();
    double cauchy();
    double student_t(double df);
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 gen_;
};

} // namespace cps
