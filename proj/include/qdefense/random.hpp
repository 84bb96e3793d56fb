#pragma once

#include <cstdint>
#include <random>

namespace qdefense {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of the generator. Sampling
// goes through this instead of std::uniform_real_distribution so that traces
// are byte-identical across standard library implementations.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n).
inline int uniform_index(Rng& rng, int n) {
    return static_cast<int>(uniform_unit(rng) * static_cast<double>(n));
}

// Uniform angle in [0, 2*pi).
inline double uniform_angle(Rng& rng) {
    return uniform_unit(rng) * 6.283185307179586476925286766559;
}

}  // namespace qdefense
