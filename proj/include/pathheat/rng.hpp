#pragma once

#include <cstdint>
#include <random>

#include "pathheat/linalg.hpp"

namespace pathheat {

using Rng = std::mt19937_64;

// Independent stream for trajectory `index` of a run seeded with `master`.
Rng make_stream(std::uint64_t master, std::uint64_t index);

inline Vec gaussian_vec(Rng& rng, int n) {
    std::normal_distribution<double> normal;
    Vec v(n);
    for (int k = 0; k < n; ++k) v[k] = normal(rng);
    return v;
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace pathheat
