#pragma once

#include "sphr/math.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sphr {

/// Deterministic random helpers on top of mt19937_64.
///
/// The standard distributions are implementation-defined, so scenario generation
/// uses these explicit transforms instead; a given seed yields the same particle
/// configuration under any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 significant bits.
    double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform01();
        while (u == 0.0) u = uniform01();
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double t = 2.0 * std::numbers::pi * v;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    Vec3 gaussian_vec3() {
        const double a = gaussian();
        const double b = gaussian();
        const double c = gaussian();
        return {a, b, c};
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace sphr
