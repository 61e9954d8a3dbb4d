#include "sphr/errors.hpp"
#include "sphr/neighbors.hpp"
#include "sphr/sph.hpp"

#include "support/test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <vector>

using namespace sphr;

namespace {

struct EnginePipeline {
    NeighborRelation relation;
    EffectiveNeighbors effective;
    std::vector<KernelSpec> specs;
    PairTerms terms;

    EnginePipeline(const ParticleTable& table, int k)
        : relation(build_relation(Octree::build(table, 16), table, k, MetricTensor::euclidean())),
          effective(symmetric_closure(relation)),
          specs(particle_specs(table, relation)),
          terms(build_pair_terms(table, effective, specs)) {}
};

} // namespace

TEST_CASE("pair terms carry the kernel symmetries") {
    const ParticleTable table = testutil::random_table(120, 61, 4.0);
    const EnginePipeline p(table, 8);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto row = p.terms.row(static_cast<ParticleId>(i));
        for (std::size_t s = 0; s < row.ids.size(); ++s) {
            const ParticleId j = row.ids[s];
            // Locate the mirrored entry (i in row j).
            const auto row_j = p.terms.row(j);
            const auto it = std::lower_bound(row_j.ids.begin(), row_j.ids.end(),
                                             static_cast<ParticleId>(i));
            REQUIRE(it != row_j.ids.end());
            const std::size_t sj = static_cast<std::size_t>(it - row_j.ids.begin());
            CHECK(row.w[s] == row_j.w[sj]);
            CHECK(row.grad_w[s].x == -row_j.grad_w[sj].x);
            CHECK(row.grad_w[s].y == -row_j.grad_w[sj].y);
            CHECK(row.grad_w[s].z == -row_j.grad_w[sj].z);
            CHECK(row.xi[s] == row_j.xi[sj]);
        }
    }
}

TEST_CASE("density of an isolated particle is m W(0)") {
    const ParticleTable table = ParticleTable::create({2.5}, {Vec3{1, 2, 3}}, {Vec3{}});
    const EnginePipeline p(table, 1);
    const std::vector<double> rho = compute_density(table, p.terms);
    // Support falls back to one length unit.
    CHECK(rho[0] == doctest::Approx(2.5 * 8.0 / std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("two coincident particles superpose") {
    const ParticleTable table =
        ParticleTable::create({1.0, 1.0}, {Vec3{1, 1, 1}, Vec3{1, 1, 1}}, std::vector<Vec3>(2));
    const EnginePipeline p(table, 2);
    const std::vector<double> rho = compute_density(table, p.terms);
    const double w0 = 8.0 / std::numbers::pi; // h fallback = 1 for both
    CHECK(rho[0] == doctest::Approx(2.0 * w0).epsilon(1e-14));
    CHECK(rho[1] == doctest::Approx(2.0 * w0).epsilon(1e-14));
}

TEST_CASE("lattice densities: interior near one and equal to the direct sums") {
    const int side = 16;
    const int k = 33;
    const ParticleTable table = testutil::lattice_table(side);
    const EnginePipeline p(table, k);
    const std::vector<double> rho = compute_density(table, p.terms);

    const testutil::DirectPipeline oracle(table, k);
    int interior_checked = 0;
    for (int z = 0; z < side; ++z) {
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                const auto id = static_cast<ParticleId>(testutil::lattice_id(side, x, y, z));
                CHECK(rho[id] > 0.0);
                CHECK(testutil::rel_diff(rho[id], oracle.density(id)) < 1e-12);
                const bool interior = x >= 3 && x <= side - 4 && y >= 3 && y <= side - 4
                                      && z >= 3 && z <= side - 4;
                if (interior) {
                    CHECK(std::abs(rho[id] - 1.0) < 0.02);
                    ++interior_checked;
                }
            }
        }
    }
    CHECK(interior_checked == 1000);
}

TEST_CASE("density identity: interpolating the density field returns it") {
    SUBCASE("lattice") {
        ParticleTable table = testutil::lattice_table(8);
        const EnginePipeline p(table, 33);
        table.set_densities(compute_density(table, p.terms));
        for (std::size_t i = 0; i < table.size(); ++i) {
            const double interpolated =
                interpolate_scalar(table, p.terms, table.densities(), static_cast<ParticleId>(i));
            CHECK(testutil::rel_diff(interpolated, table.densities()[i]) < 1e-12);
        }
    }
    SUBCASE("random cloud") {
        ParticleTable table = testutil::random_table(300, 99, 5.0);
        const EnginePipeline p(table, 12);
        table.set_densities(compute_density(table, p.terms));
        for (std::size_t i = 0; i < table.size(); ++i) {
            const double interpolated =
                interpolate_scalar(table, p.terms, "rho", static_cast<ParticleId>(i));
            CHECK(testutil::rel_diff(interpolated, table.densities()[i]) < 1e-12);
        }
    }
}

TEST_CASE("interpolating an isolated particle's attribute returns it exactly") {
    ParticleTable table = ParticleTable::create({3.0}, {Vec3{}}, {Vec3{}});
    table.set_attribute("a", {42.0});
    const EnginePipeline p(table, 1);
    table.set_densities(compute_density(table, p.terms));
    CHECK(interpolate_scalar(table, p.terms, "a", 0) == doctest::Approx(42.0).epsilon(1e-15));
}

TEST_CASE("constant field interpolates to itself within one percent") {
    const int side = 16;
    ParticleTable table = testutil::lattice_table(side);
    const EnginePipeline p(table, 33);
    table.set_densities(compute_density(table, p.terms));
    std::vector<double> constant(table.size(), 7.0);
    table.set_attribute("A", constant);
    for (int z = 3; z <= side - 4; ++z) {
        for (int y = 3; y <= side - 4; ++y) {
            for (int x = 3; x <= side - 4; ++x) {
                const auto id = static_cast<ParticleId>(testutil::lattice_id(side, x, y, z));
                const double est = interpolate_scalar(table, p.terms, "A", id);
                CHECK(std::abs(est - 7.0) < 0.07);
            }
        }
    }
}

TEST_CASE("gradient estimates") {
    SUBCASE("single particle gives zero") {
        ParticleTable table = ParticleTable::create({1.0}, {Vec3{}}, {Vec3{}});
        const EnginePipeline p(table, 1);
        table.set_densities(compute_density(table, p.terms));
        std::vector<double> values{5.0};
        CHECK(interpolate_gradient(table, p.terms, values, 0) == Vec3{});
    }
    SUBCASE("mirror-symmetric pair cancels exactly") {
        ParticleTable table = ParticleTable::create(
            {1, 1, 1}, {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{-1, 0, 0}}, std::vector<Vec3>(3));
        const EnginePipeline p(table, 3);
        table.set_densities({1.0, 1.0, 1.0});
        std::vector<double> values{4.0, 4.0, 4.0};
        const Vec3 g = interpolate_gradient(table, p.terms, values, 0);
        CHECK(g.x == 0.0);
        CHECK(g.y == 0.0);
        CHECK(g.z == 0.0);
    }
    SUBCASE("linear field on the lattice interior") {
        const int side = 16;
        ParticleTable table = testutil::lattice_table(side);
        const EnginePipeline p(table, 33);
        table.set_densities(compute_density(table, p.terms));
        std::vector<double> values(table.size());
        for (std::size_t i = 0; i < table.size(); ++i) values[i] = 2.0 * table.positions()[i].x;

        table.set_attribute("twice_x", values);
        const testutil::DirectPipeline oracle(table, 33);
        for (const auto [x, y, z] :
             {std::array<int, 3>{7, 7, 7}, {4, 8, 11}, {5, 5, 10}, {10, 4, 6}}) {
            const auto id = static_cast<ParticleId>(testutil::lattice_id(side, x, y, z));
            const Vec3 g = interpolate_gradient(table, p.terms, values, id);
            const Vec3 want = oracle.gradient(id, values, table.densities());
            CHECK(norm(g - want) < 1e-12 * (1.0 + norm(want)));
            CHECK(std::abs(g.x - 2.0) < 0.1); // within 5 percent of the true slope
            CHECK(std::abs(g.y) < 0.05);
            CHECK(std::abs(g.z) < 0.05);
            const Vec3 by_name = interpolate_gradient(table, p.terms, "twice_x", id);
            CHECK(by_name == g);
        }
    }
}

TEST_CASE("equation of state") {
    ParticleTable table = testutil::random_table(3, 1);
    SUBCASE("isothermal line") {
        table.set_densities({2.0, 1.0, 0.5});
        const std::vector<double> p = apply_eos(table, EosParams{1.0, 1.0});
        CHECK(p[0] == 2.0);
        CHECK(p[1] == 1.0);
        CHECK(p[2] == 0.5);
    }
    SUBCASE("pressureless") {
        table.set_densities({2.0, 1.0, 0.5});
        const std::vector<double> p = apply_eos(table, EosParams{0.0, 5.0 / 3.0});
        CHECK(p[0] == 0.0);
        CHECK(p[2] == 0.0);
    }
    SUBCASE("adiabatic arithmetic") {
        table.set_densities({8.0, 1.0, 1.0});
        const std::vector<double> p = apply_eos(table, EosParams{1.0, 5.0 / 3.0});
        CHECK(p[0] == doctest::Approx(32.0).epsilon(1e-14));
    }
    SUBCASE("monotone in density for positive K") {
        table.set_densities({1.0, 2.0, 3.0});
        const std::vector<double> p = apply_eos(table, EosParams{0.7, 1.4});
        CHECK(p[0] < p[1]);
        CHECK(p[1] < p[2]);
    }
    SUBCASE("invalid parameters") {
        table.set_densities({1.0, 1.0, 1.0});
        CHECK_THROWS_AS(apply_eos(table, EosParams{-1.0, 1.0}), InvalidArgument);
        CHECK_THROWS_AS(apply_eos(table, EosParams{1.0, 0.5}), InvalidArgument);
    }
    SUBCASE("unset densities rejected") {
        CHECK_THROWS_AS(apply_eos(table, EosParams{}), NumericError);
    }
}

TEST_CASE("forces") {
    SUBCASE("pure external field") {
        ParticleTable table = testutil::lattice_table(4);
        const EnginePipeline p(table, 8);
        table.set_densities(compute_density(table, p.terms));
        table.set_pressures(apply_eos(table, EosParams{0.0, 1.0}));
        ForceConfig cfg;
        cfg.eos = EosParams{0.0, 1.0};
        cfg.external_force = [](const Vec3&) { return Vec3{0, 0, -1}; };
        const std::vector<Vec3> a = compute_forces(table, p.terms, cfg);
        for (const Vec3& ai : a) {
            CHECK(ai.x == 0.0);
            CHECK(ai.y == 0.0);
            CHECK(ai.z == -1.0);
        }
    }
    SUBCASE("two-body pair is exactly antisymmetric") {
        // With h = sqrt(xi_max) the only neighbor sits exactly on the support
        // boundary, so this fixture exerts zero force; antisymmetry still has
        // to hold bit for bit.
        ParticleTable table = ParticleTable::create(
            {1.5, 1.5}, {Vec3{-0.4, 0, 0}, Vec3{0.4, 0, 0}},
            {Vec3{0, 0.3, 0}, Vec3{0, -0.3, 0}});
        const EnginePipeline p(table, 2);
        table.set_densities(compute_density(table, p.terms));
        table.set_pressures(apply_eos(table, EosParams{1.0, 5.0 / 3.0}));
        ForceConfig cfg;
        cfg.eos = EosParams{1.0, 5.0 / 3.0};
        const std::vector<Vec3> a = compute_forces(table, p.terms, cfg);
        CHECK(a[0].x == -a[1].x);
        CHECK(a[0].y == -a[1].y);
        CHECK(a[0].z == -a[1].z);
    }
    SUBCASE("overlapping supports push a pair apart, still antisymmetrically") {
        ParticleTable table = ParticleTable::create(
            {1.0, 2.0}, {Vec3{-0.4, 0, 0}, Vec3{0.4, 0, 0}}, std::vector<Vec3>(2));
        const NeighborRelation relation =
            build_relation(Octree::build(table, 2), table, 2, MetricTensor::euclidean());
        const EffectiveNeighbors effective = symmetric_closure(relation);
        const std::vector<KernelSpec> specs(2, KernelSpec::isotropic(2.0));
        const PairTerms terms = build_pair_terms(table, effective, specs);
        table.set_densities(compute_density(table, terms));
        table.set_pressures(apply_eos(table, EosParams{1.0, 5.0 / 3.0}));
        ForceConfig cfg;
        cfg.eos = EosParams{1.0, 5.0 / 3.0};
        const std::vector<Vec3> a = compute_forces(table, terms, cfg);
        CHECK(a[0].x < 0.0); // repulsion along the separation axis
        CHECK(a[1].x > 0.0);
        // Unequal masses: the forces (not the accelerations) cancel exactly.
        CHECK(1.0 * a[0].x == -(2.0 * a[1].x));
        CHECK(a[0].y == 0.0);
        CHECK(a[0].z == 0.0);
    }
    SUBCASE("uniform pressure cancels on the deep lattice interior") {
        const int side = 16;
        ParticleTable table = testutil::lattice_table(side);
        const EnginePipeline p(table, 33);
        table.set_densities(std::vector<double>(table.size(), 1.0));
        table.set_pressures(std::vector<double>(table.size(), 1.0));
        ForceConfig cfg;
        cfg.eos = EosParams{1.0, 1.0};
        cfg.viscosity = ViscosityParams{0.0, 0.0, 0.01};
        const std::vector<Vec3> a = compute_forces(table, p.terms, cfg);
        for (int z = 4; z <= side - 5; ++z) {
            for (int y = 4; y <= side - 5; ++y) {
                for (int x = 4; x <= side - 5; ++x) {
                    const auto id = static_cast<ParticleId>(testutil::lattice_id(side, x, y, z));
                    CHECK(norm(a[id]) < 1e-3); // bound: 1e-3 P/(rho dx)
                }
            }
        }
    }
    SUBCASE("global momentum balance per evaluation") {
        ParticleTable table = testutil::random_table(400, 3, 6.0);
        const EnginePipeline p(table, 16);
        table.set_densities(compute_density(table, p.terms));
        table.set_pressures(apply_eos(table, EosParams{1.0, 5.0 / 3.0}));
        ForceConfig cfg;
        cfg.eos = EosParams{1.0, 5.0 / 3.0};
        const std::vector<Vec3> a = compute_forces(table, p.terms, cfg);
        Vec3 total{};
        double scale = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            total += table.masses()[i] * a[i];
            scale += table.masses()[i] * norm(a[i]);
        }
        CHECK(norm(total) < 1e-10 * scale);
    }
    SUBCASE("viscosity only acts on approaching pairs and keeps the balance") {
        ParticleTable table = testutil::random_table(200, 5, 4.0);
        // Random velocities so some pairs approach.
        Rng rng(17);
        for (Vec3& v : table.velocities()) v = rng.gaussian_vec3();
        const EnginePipeline p(table, 12);
        table.set_densities(compute_density(table, p.terms));
        table.set_pressures(apply_eos(table, EosParams{1.0, 5.0 / 3.0}));
        ForceConfig cfg;
        cfg.eos = EosParams{1.0, 5.0 / 3.0};
        cfg.viscosity = ViscosityParams{1.0, 2.0, 0.01};
        const std::vector<Vec3> a = compute_forces(table, p.terms, cfg);
        Vec3 total{};
        double scale = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            total += table.masses()[i] * a[i];
            scale += table.masses()[i] * norm(a[i]);
        }
        CHECK(norm(total) < 1e-10 * scale);
    }
    SUBCASE("density must be positive") {
        ParticleTable table = testutil::random_table(4, 9);
        const EnginePipeline p(table, 2);
        ForceConfig cfg;
        CHECK_THROWS_AS(compute_forces(table, p.terms, cfg), NumericError);
    }
    SUBCASE("NaN pressure is rejected") {
        ParticleTable table = testutil::random_table(4, 9);
        const EnginePipeline p(table, 2);
        table.set_densities(compute_density(table, p.terms));
        auto pressures = std::vector<double>(table.size(), 1.0);
        table.set_pressures(pressures);
        // Bypass the setter's finite check by injecting through the span.
        table.pressures()[2] = std::numeric_limits<double>::quiet_NaN();
        ForceConfig cfg;
        CHECK_THROWS_AS(compute_forces(table, p.terms, cfg), NumericError);
    }
}

TEST_CASE("interpolation errors") {
    ParticleTable table = testutil::random_table(5, 13);
    const EnginePipeline p(table, 3);
    SUBCASE("unset densities") {
        std::vector<double> values(5, 1.0);
        CHECK_THROWS_AS(interpolate_scalar(table, p.terms, values, 0), NumericError);
    }
    SUBCASE("unknown attribute") {
        table.set_densities(compute_density(table, p.terms));
        CHECK_THROWS_AS(interpolate_scalar(table, p.terms, "missing", 0), InvalidArgument);
    }
}
