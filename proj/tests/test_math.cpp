#include "sphr/math.hpp"
#include "sphr/random.hpp"

#include "support/test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace sphr;

TEST_CASE("vec3 and mat3 basics") {
    const Vec3 a{1, 2, 3};
    const Vec3 b{-1, 0, 2};
    CHECK(dot(a, b) == 5.0);
    CHECK(cross(Vec3{1, 0, 0}, Vec3{0, 1, 0}) == Vec3{0, 0, 1});
    CHECK(norm2(a) == 14.0);

    const Mat3 m = Mat3::diagonal(2, 3, 4);
    CHECK(m.det() == 24.0);
    CHECK(m.trace() == 9.0);
    CHECK((m * Vec3{1, 1, 1}) == Vec3{2, 3, 4});
    CHECK(quad_form(m, Vec3{1, 2, 0}) == doctest::Approx(2 + 12).epsilon(1e-15));
}

TEST_CASE("inverse_sym inverts SPD matrices") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat3 m = testutil::random_spd(rng);
        const Mat3 inv = inverse_sym(m);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double prod = 0.0;
                for (int k = 0; k < 3; ++k) prod += m(i, k) * inv(k, j);
                CHECK(prod == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
            }
        }
    }
}

TEST_CASE("eigen_sym3 on diagonal and zero matrices") {
    SUBCASE("zero matrix") {
        const SymEigen3 e = eigen_sym3(Mat3::zero());
        CHECK(e.values == std::array<double, 3>{0, 0, 0});
        CHECK(e.vectors[0] == Vec3{1, 0, 0});
    }
    SUBCASE("diagonal is exact") {
        const SymEigen3 e = eigen_sym3(Mat3::diagonal(3, 7, 5));
        CHECK(e.values == std::array<double, 3>{7, 5, 3});
        CHECK(e.vectors[0] == Vec3{0, 1, 0});
        CHECK(e.vectors[1] == Vec3{0, 0, 1});
        CHECK(e.vectors[2] == Vec3{1, 0, 0});
    }
}

TEST_CASE("eigen_sym3 reconstructs random symmetric matrices") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const Mat3 m = testutil::random_spd(rng, -2.0, 5.0); // indefinite allowed
        const SymEigen3 e = eigen_sym3(m);

        CHECK(e.values[0] >= e.values[1]);
        CHECK(e.values[1] >= e.values[2]);

        // Orthonormal within 1e-13.
        for (int i = 0; i < 3; ++i) {
            CHECK(norm(e.vectors[i]) == doctest::Approx(1.0).epsilon(1e-13));
            for (int j = i + 1; j < 3; ++j) {
                CHECK(std::abs(dot(e.vectors[i], e.vectors[j])) < 1e-12);
            }
        }

        // A v = lambda v and sum of outer products reconstructs A.
        const double scale = std::max(max_abs(m), 1e-30);
        Mat3 rebuilt = Mat3::zero();
        for (int i = 0; i < 3; ++i) {
            const Vec3 av = m * e.vectors[i];
            const Vec3 lv = e.values[i] * e.vectors[i];
            CHECK(norm(av - lv) < 1e-12 * scale);
            rebuilt += e.values[i] * outer(e.vectors[i], e.vectors[i]);
        }
        for (int idx = 0; idx < 9; ++idx) {
            CHECK(std::abs(rebuilt.a[idx] - symmetric_part(m).a[idx]) < 1e-12 * scale);
        }

        // Deterministic orientation: largest-magnitude component positive.
        for (int i = 0; i < 3; ++i) {
            const Vec3& v = e.vectors[i];
            double best = std::abs(v.x);
            double signed_best = v.x;
            if (std::abs(v.y) > best) { best = std::abs(v.y); signed_best = v.y; }
            if (std::abs(v.z) > best) { signed_best = v.z; }
            CHECK(signed_best > 0.0);
        }
    }
}

TEST_CASE("eigen_sym3 handles repeated eigenvalues") {
    SUBCASE("isotropic") {
        const SymEigen3 e = eigen_sym3(Mat3::diagonal(2, 2, 2));
        CHECK(e.values == std::array<double, 3>{2, 2, 2});
    }
    SUBCASE("rotated pancake") {
        Rng rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            const Mat3 r = testutil::random_rotation(rng);
            // eigenvalues (4, 4, 1) in a random frame
            Mat3 m = Mat3::zero();
            const double evs[3] = {4, 4, 1};
            for (int i = 0; i < 3; ++i) {
                const Vec3 col{r(0, i), r(1, i), r(2, i)};
                m += evs[i] * outer(col, col);
            }
            const SymEigen3 e = eigen_sym3(m);
            CHECK(e.values[0] == doctest::Approx(4.0).epsilon(1e-12));
            CHECK(e.values[1] == doctest::Approx(4.0).epsilon(1e-12));
            CHECK(e.values[2] == doctest::Approx(1.0).epsilon(1e-12));
            for (int i = 0; i < 3; ++i) {
                const Vec3 av = m * e.vectors[i];
                CHECK(norm(av - e.values[i] * e.vectors[i]) < 1e-11);
            }
        }
    }
}

TEST_CASE("eigen_sym3 is scale invariant in conditioning") {
    Rng rng(99);
    for (double s : {1e-20, 1e-6, 1.0, 1e6, 1e20}) {
        const Mat3 m = s * testutil::random_spd(rng);
        const SymEigen3 e = eigen_sym3(m);
        for (int i = 0; i < 3; ++i) {
            CHECK(norm(m * e.vectors[i] - e.values[i] * e.vectors[i]) < 1e-12 * max_abs(m));
        }
    }
}
