#pragma once

// deterministic RNG helpers shared by the test suites

#include <random>

#include "honeycomb/model.hpp"

namespace testutil {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = std::ldexp(static_cast<double>(rng()), -64);
    return lo + (hi - lo) * u;
}

inline honeycomb::Vec2 random_bz(std::mt19937_64& rng) {
    const double a = uniform(rng, 0.0, 1.0), b = uniform(rng, 0.0, 1.0);
    return a * honeycomb::dual1() + b * honeycomb::dual2();
}

inline honeycomb::Momentum3 random_momentum(std::mt19937_64& rng, double k0max = 2.0) {
    const auto k = random_bz(rng);
    return {uniform(rng, -k0max, k0max), k.x, k.y};
}

inline honeycomb::cd random_unit_disc(std::mt19937_64& rng, double radius = 1.0) {
    return {uniform(rng, -radius, radius), uniform(rng, -radius, radius)};
}

}  // namespace testutil
