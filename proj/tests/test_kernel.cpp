#include "sphr/errors.hpp"
#include "sphr/kernel.hpp"
#include "sphr/random.hpp"

#include "support/test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace sphr;

namespace {

// Composite Simpson quadrature of W over its bounding box; independent of any
// closed-form normalization knowledge.
double quadrature_integral(const KernelSpec& spec, int points_per_axis = 121) {
    const Mat3 inv = inverse_sym(spec.form());
    // Support half-width along axis a is sqrt((Q^-1)_aa) at q = 1.
    const double wx = std::sqrt(inv(0, 0)) * 1.001;
    const double wy = std::sqrt(inv(1, 1)) * 1.001;
    const double wz = std::sqrt(inv(2, 2)) * 1.001;
    const int n = points_per_axis | 1; // Simpson needs an odd count
    auto weight = [n](int i) {
        if (i == 0 || i == n - 1) return 1.0;
        return (i % 2 == 1) ? 4.0 : 2.0;
    };
    const double hx = 2 * wx / (n - 1), hy = 2 * wy / (n - 1), hz = 2 * wz / (n - 1);
    double sum = 0.0;
    for (int ix = 0; ix < n; ++ix) {
        const double x = -wx + ix * hx;
        for (int iy = 0; iy < n; ++iy) {
            const double y = -wy + iy * hy;
            double line = 0.0;
            for (int iz = 0; iz < n; ++iz) {
                line += weight(iz) * spec.value(Vec3{x, y, -wz + iz * hz});
            }
            sum += weight(ix) * weight(iy) * line;
        }
    }
    return sum * hx * hy * hz / 27.0;
}

Vec3 central_difference(const KernelSpec& spec, const Vec3& dx, double step) {
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
        Vec3 hi = dx, lo = dx;
        hi[a] += step;
        lo[a] -= step;
        g[a] = (spec.value(hi) - spec.value(lo)) / (2 * step);
    }
    return g;
}

} // namespace

TEST_CASE("compact support and peak value") {
    const double h = 1.7;
    const KernelSpec spec = KernelSpec::isotropic(h);
    CHECK(spec.value(Vec3{h, 0, 0}) == 0.0);
    CHECK(spec.value(Vec3{2 * h, 0, 0}) == 0.0);
    CHECK(spec.value(Vec3{0, 0.999 * h, 0}) > 0.0);
    CHECK(spec.value(Vec3{}) == doctest::Approx(8.0 / (std::numbers::pi * h * h * h)).epsilon(1e-15));
    CHECK(spec.peak() == spec.value(Vec3{}));
    CHECK(spec.support_length() == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("kernel integrates to one") {
    SUBCASE("isotropic") {
        CHECK(std::abs(quadrature_integral(KernelSpec::isotropic(1.0)) - 1.0) < 1e-4);
        CHECK(std::abs(quadrature_integral(KernelSpec::isotropic(2.5)) - 1.0) < 1e-4);
    }
    SUBCASE("anisotropic") {
        Rng rng(77);
        for (int t = 0; t < 3; ++t) {
            const KernelSpec spec = KernelSpec::metric_adapted(testutil::random_spd(rng), 1.0);
            CHECK(std::abs(quadrature_integral(spec) - 1.0) < 1e-4);
        }
    }
}

TEST_CASE("metric form with identity reproduces the isotropic kernel") {
    const KernelSpec iso = KernelSpec::isotropic(1.0);
    const KernelSpec aniso = KernelSpec::metric_adapted(Mat3::identity(), 1.0);
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const Vec3 dx = 0.7 * rng.gaussian_vec3();
        CHECK(testutil::rel_diff(iso.value(dx), aniso.value(dx)) < 1e-12);
        CHECK(norm(iso.gradient(dx) - aniso.gradient(dx)) <= 1e-12 * (1.0 + norm(iso.gradient(dx))));
    }
}

TEST_CASE("gradient is zero at the origin and odd in dx") {
    const KernelSpec spec = KernelSpec::isotropic(1.3);
    CHECK(spec.gradient(Vec3{}) == Vec3{});
    Rng rng(12);
    for (int t = 0; t < 100; ++t) {
        const Vec3 dx = 0.5 * rng.gaussian_vec3();
        const Vec3 g1 = spec.gradient(dx);
        const Vec3 g2 = spec.gradient(-dx);
        CHECK(g1.x == -g2.x);
        CHECK(g1.y == -g2.y);
        CHECK(g1.z == -g2.z);
    }
}

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(21);
    const KernelSpec specs[2] = {KernelSpec::isotropic(1.0),
                                 KernelSpec::metric_adapted(testutil::random_spd(rng, 0.8, 2.5), 1.0)};
    for (const KernelSpec& spec : specs) {
        int checked = 0;
        while (checked < 100) {
            // Interior points: q in [0.1, 0.9] so the relative error is meaningful.
            Vec3 dir = rng.gaussian_vec3();
            dir = dir / norm(dir);
            const double q_target = rng.uniform(0.1, 0.9);
            const double scale = std::sqrt(quad_form(spec.form(), dir));
            const Vec3 dx = (q_target / scale) * dir;
            const Vec3 analytic = spec.gradient(dx);
            if (norm(analytic) < 1e-6) continue;
            const Vec3 fd = central_difference(spec, dx, 1e-6 * spec.support_length());
            CHECK(norm(fd - analytic) / norm(analytic) < 1e-6);
            ++checked;
        }
    }
}

TEST_CASE("value and gradient are continuous across the profile seams") {
    const KernelSpec spec = KernelSpec::isotropic(1.0);
    for (const double q : {0.5, 1.0}) {
        const double eps = 1e-9;
        const Vec3 below{q - eps, 0, 0};
        const Vec3 above{q + eps, 0, 0};
        CHECK(std::abs(spec.value(below) - spec.value(above)) < 1e-7);
        CHECK(norm(spec.gradient(below) - spec.gradient(above)) < 1e-7);
    }
}

TEST_CASE("radial profile decreases monotonically inside the support") {
    const KernelSpec spec = KernelSpec::isotropic(1.0);
    double prev = spec.value(Vec3{});
    for (int i = 1; i <= 100; ++i) {
        const double val = spec.value(Vec3{i / 100.0, 0, 0});
        CHECK(val <= prev);
        CHECK(val >= 0.0);
        prev = val;
    }
}

TEST_CASE("pair specs are symmetric and collapse for equal inputs") {
    SUBCASE("isotropic average") {
        const KernelSpec p = pair_spec(KernelSpec::isotropic(1.0), KernelSpec::isotropic(3.0));
        CHECK(p.support_length() == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("bitwise symmetry under swap") {
        Rng rng(31);
        for (int t = 0; t < 20; ++t) {
            const KernelSpec a = KernelSpec::metric_adapted(testutil::random_spd(rng), 1.0);
            const KernelSpec b = KernelSpec::metric_adapted(testutil::random_spd(rng), 2.0);
            const KernelSpec ab = pair_spec(a, b);
            const KernelSpec ba = pair_spec(b, a);
            CHECK(ab.form() == ba.form());
            const Vec3 dx = rng.gaussian_vec3();
            CHECK(ab.value(dx) == ba.value(dx));
            CHECK(ab.value(dx) == ba.value(-dx)); // gradient oddness + value evenness
        }
    }
    SUBCASE("self pair is the shared spec for matching isotropic supports") {
        const KernelSpec a = KernelSpec::isotropic(1.25);
        const KernelSpec p = pair_spec(a, a);
        CHECK(p.value(Vec3{0.3, 0.1, 0}) == a.value(Vec3{0.3, 0.1, 0}));
    }
}

TEST_CASE("kernel input validation") {
    CHECK_THROWS_AS(KernelSpec::isotropic(0.0), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec::isotropic(-1.0), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec::metric_adapted(Mat3::diagonal(1, 1, -1), 1.0), InvalidArgument);
    const KernelSpec spec = KernelSpec::isotropic(1.0);
    CHECK_THROWS_AS(spec.value(Vec3{std::numeric_limits<double>::quiet_NaN(), 0, 0}),
                    InvalidArgument);
    CHECK_THROWS_AS(spec.gradient(Vec3{std::numeric_limits<double>::infinity(), 0, 0}),
                    InvalidArgument);
}
