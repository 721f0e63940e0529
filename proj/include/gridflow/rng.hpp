#pragma once

#include <cstdint>

namespace gridflow {

// Deterministic counter-style RNG built on splitmix64. Streams derived from
// (seed, stream) are independent of each other and of worker scheduling, so
// record-parallel and chain-parallel code paths stay reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Independent substream for e.g. (dataset seed, record index).
    static Rng substream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; second deviate of each pair is cached.
    double normal();

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gridflow
