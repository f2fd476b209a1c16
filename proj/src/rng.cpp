#include "isomix/rng.hpp"

#include <cmath>

namespace isomix {

double Rng::normal() {
    // u1 in (0, 1] so log is finite; u2 in [0, 1).
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

VectorXd Rng::normal_vector(int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag) {
    // SplitMix64 finalizer over (master, tag).
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace isomix
