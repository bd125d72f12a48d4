#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "heiskak/hgroup.hpp"

namespace heiskak {

/// Reproducible random source. The engine is std::mt19937_64 (fully specified
/// by the standard); floating-point conversion is done here rather than via
/// std::uniform_real_distribution so outputs do not depend on the library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    /// Independent stream for sub-task `index` of a run seeded with `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix(seed) ^ mix(index + 0x9e3779b97f4a7c15ULL));
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    double normal() {
        // Box-Muller; u1 in (0, 1]
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vec3 on_unit_sphere() {
        for (;;) {
            const Vec3 g{normal(), normal(), normal()};
            const double n = g.norm();
            if (n > 1e-12) return g * (1.0 / n);
        }
    }

    /// Uniform point of the unit Euclidean ball by rejection from the cube.
    Vec3 in_unit_ball() {
        for (;;) {
            const Vec3 v{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
            if (v.dot(v) <= 1.0) return v;
        }
    }

    /// Uniform point of the Koranyi unit ball B_H(0, 1) by rejection.
    HPoint in_koranyi_ball(double radius = 1.0) {
        for (;;) {
            const HPoint p{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-0.25, 0.25)};
            if (koranyi_norm(p) <= 1.0) return dilate(radius, p);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace heiskak
