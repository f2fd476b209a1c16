#pragma once

#include <cstdint>
#include <random>

#include "isomix/types.hpp"

namespace isomix {

// Deterministic random stream with a platform-independent mapping from
// engine output to doubles.  std::mt19937_64's output sequence is pinned by
// the standard; the uniform/normal transforms are implemented by hand
// because the standard library *distributions* are not portable across
// implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (no cached spare, so the draw sequence
    // is a pure function of the call count).
    double normal();

    VectorXd normal_vector(int n);

private:
    std::mt19937_64 engine_;
};

// Derives an independent seed for a tagged substream (e.g. one per optimizer
// iteration) from a master seed.  SplitMix64 finalizer keeps streams with
// nearby tags uncorrelated.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag);

}  // namespace isomix
