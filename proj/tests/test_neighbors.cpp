#include "sphr/errors.hpp"
#include "sphr/neighbors.hpp"
#include "sphr/random.hpp"

#include "support/test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

using namespace sphr;

namespace {

void check_matches_oracle(const ParticleTable& table, int k, const MetricTensor& m) {
    const Octree tree = Octree::build(table, 8);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const NeighborList got = knn_query(tree, table, static_cast<ParticleId>(i), k, m);
        const auto want = testutil::brute_knn(table.positions(), static_cast<ParticleId>(i), k,
                                              m.form());
        REQUIRE(got.ids.size() == want.size());
        for (std::size_t r = 0; r < want.size(); ++r) {
            CHECK(got.ids[r] == want[r].second);
            CHECK(got.xi[r] == want[r].first);
        }
    }
}

} // namespace

TEST_CASE("k = 1 returns only the improper neighbor") {
    const ParticleTable table = testutil::random_table(64, 5);
    const Octree tree = Octree::build(table, 8);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const NeighborList list =
            knn_query(tree, table, static_cast<ParticleId>(i), 1, MetricTensor::euclidean());
        REQUIRE(list.ids.size() == 1);
        CHECK(list.ids[0] == i);
        CHECK(list.xi[0] == 0.0);
        CHECK(list.xi_max() == 0.0);
    }
}

TEST_CASE("three colinear points expose the asymmetry and its closure") {
    // a at 0, c at 0.4, b at 1.0 on the x axis.
    const ParticleTable table = ParticleTable::create(
        {1, 1, 1}, {Vec3{0, 0, 0}, Vec3{0.4, 0, 0}, Vec3{1.0, 0, 0}}, std::vector<Vec3>(3));
    constexpr ParticleId a = 0, c = 1, b = 2;

    const Octree tree = Octree::build(table, 2);
    const NeighborRelation relation = build_relation(tree, table, 2, MetricTensor::euclidean());

    CHECK(relation.neighbors(a)[0] == a);
    CHECK(relation.neighbors(a)[1] == c);
    CHECK(relation.neighbors(c)[0] == c);
    CHECK(relation.neighbors(c)[1] == a);
    CHECK(relation.neighbors(b)[0] == b);
    CHECK(relation.neighbors(b)[1] == c); // (b, c) in the relation

    // (c, b) is not: c prefers a.
    const auto c_row = relation.neighbors(c);
    CHECK(std::find(c_row.begin(), c_row.end(), b) == c_row.end());

    const EffectiveNeighbors eff = symmetric_closure(relation);
    CHECK(eff.contains(c, b)); // the closure adds the reverse pair
    CHECK(eff.contains(b, c));
    CHECK(eff.of(c).size() == 3);
    CHECK(eff.of(a).size() == 2);
    CHECK(eff.of(b).size() == 2);
}

TEST_CASE("octree queries match the brute-force oracle") {
    Rng rng(1234);
    const MetricTensor metrics[3] = {MetricTensor::euclidean(),
                                     MetricTensor::from_form(Mat3::diagonal(4, 1, 1)),
                                     MetricTensor::from_form(testutil::random_spd(rng))};
    int which = 0;
    for (const std::size_t n : {50, 300}) {
        for (const int k : {1, 8, 33}) {
            const ParticleTable table = testutil::random_table(n, 77 * n + k);
            check_matches_oracle(table, k, metrics[which % 3]);
            ++which;
        }
    }
}

TEST_CASE("oracle equivalence with coincident positions (tie rule)") {
    std::vector<Vec3> positions;
    Rng rng(9);
    for (int i = 0; i < 30; ++i) positions.push_back(rng.gaussian_vec3());
    // Duplicate stacks: ties must resolve towards the smaller id.
    for (int i = 0; i < 10; ++i) positions.push_back(positions[i]);
    for (int i = 0; i < 5; ++i) positions.push_back(positions[0]);
    const std::size_t n = positions.size();
    const ParticleTable table = ParticleTable::create(std::vector<double>(n, 1.0), positions,
                                                      std::vector<Vec3>(n));
    check_matches_oracle(table, 7, MetricTensor::euclidean());
    check_matches_oracle(table, 1, MetricTensor::euclidean());
    check_matches_oracle(table, static_cast<int>(n), MetricTensor::euclidean());
}

TEST_CASE("lattice queries match the oracle under anisotropy") {
    const ParticleTable table = testutil::lattice_table(6);
    check_matches_oracle(table, 33, MetricTensor::from_form(Mat3::diagonal(4, 1, 1)));
}

TEST_CASE("closure properties on random configurations") {
    for (const std::uint64_t seed : {1u, 2u, 3u}) {
        const ParticleTable table = testutil::random_table(200, seed);
        const Octree tree = Octree::build(table, 8);
        const int k = 8;
        const NeighborRelation relation = build_relation(tree, table, k, MetricTensor::euclidean());
        const EffectiveNeighbors eff = symmetric_closure(relation);

        std::size_t relation_pairs = 0;
        for (std::size_t i = 0; i < table.size(); ++i) {
            // Contains the relation.
            for (const ParticleId j : relation.neighbors(static_cast<ParticleId>(i))) {
                CHECK(eff.contains(static_cast<ParticleId>(i), j));
                ++relation_pairs;
            }
            // Distances along the list never decrease and self leads it.
            const auto xi = relation.distances(static_cast<ParticleId>(i));
            CHECK(relation.neighbors(static_cast<ParticleId>(i))[0] == i);
            for (std::size_t r = 1; r < xi.size(); ++r) CHECK(xi[r - 1] <= xi[r]);
        }
        // Symmetric, pair by pair.
        for (std::size_t i = 0; i < table.size(); ++i) {
            for (const ParticleId j : eff.of(static_cast<ParticleId>(i))) {
                CHECK(eff.contains(j, static_cast<ParticleId>(i)));
            }
        }
        // Minimal: no larger than the relation plus its proper transpose.
        CHECK(eff.pair_count() <= 2 * relation_pairs - table.size());

        // Exactly the brute-force closure.
        std::vector<std::vector<ParticleId>> lists(table.size());
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto row = relation.neighbors(static_cast<ParticleId>(i));
            lists[i].assign(row.begin(), row.end());
        }
        const auto want = testutil::brute_closure(lists);
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto got = eff.of(static_cast<ParticleId>(i));
            REQUIRE(got.size() == want[i].size());
            CHECK(std::equal(got.begin(), got.end(), want[i].begin()));
        }
    }
}

TEST_CASE("closure of an already symmetric relation is a fixed point") {
    const ParticleTable table = ParticleTable::create(
        {1, 1}, {Vec3{0, 0, 0}, Vec3{1, 0, 0}}, std::vector<Vec3>(2));
    const Octree tree = Octree::build(table, 2);
    const NeighborRelation relation = build_relation(tree, table, 2, MetricTensor::euclidean());
    const EffectiveNeighbors eff = symmetric_closure(relation);
    CHECK(eff.pair_count() == 4);
    CHECK(eff.of(0).size() == 2);
    CHECK(eff.of(1).size() == 2);
}

TEST_CASE("closure of a single reflexive pair") {
    const ParticleTable table = ParticleTable::create({1.0}, {Vec3{}}, {Vec3{}});
    const Octree tree = Octree::build(table, 2);
    const NeighborRelation relation = build_relation(tree, table, 1, MetricTensor::euclidean());
    const EffectiveNeighbors eff = symmetric_closure(relation);
    CHECK(eff.pair_count() == 1);
    CHECK(eff.contains(0, 0));
}

TEST_CASE("scaling the metric leaves the id sequences unchanged") {
    const ParticleTable table = testutil::random_table(150, 55);
    const Octree tree = Octree::build(table, 8);
    Rng rng(3);
    const Mat3 base = testutil::random_spd(rng);
    Mat3 scaled = base;
    scaled *= 3.0;
    const NeighborRelation r1 = build_relation(tree, table, 9, MetricTensor::from_form(base));
    const NeighborRelation r2 = build_relation(tree, table, 9, MetricTensor::from_form(scaled));
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto a = r1.neighbors(static_cast<ParticleId>(i));
        const auto b = r2.neighbors(static_cast<ParticleId>(i));
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}

TEST_CASE("relation building is deterministic") {
    const ParticleTable table = testutil::random_table(300, 8);
    const Octree t1 = Octree::build(table, 8);
    const Octree t2 = Octree::build(table, 8);
    CHECK(std::equal(t1.ids().begin(), t1.ids().end(), t2.ids().begin()));
    const NeighborRelation r1 = build_relation(t1, table, 12, MetricTensor::euclidean());
    const NeighborRelation r2 = build_relation(t2, table, 12, MetricTensor::euclidean());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto a = r1.neighbors(static_cast<ParticleId>(i));
        const auto b = r2.neighbors(static_cast<ParticleId>(i));
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}

TEST_CASE("query validation") {
    const ParticleTable table = testutil::random_table(10, 2);
    const Octree tree = Octree::build(table, 4);
    CHECK_THROWS_AS(knn_query(tree, table, 0, 0, MetricTensor::euclidean()), InvalidArgument);
    CHECK_THROWS_AS(knn_query(tree, table, 0, 11, MetricTensor::euclidean()), InvalidArgument);
    CHECK_THROWS_AS(knn_query(tree, table, 10, 1, MetricTensor::euclidean()), InvalidArgument);
}

TEST_CASE("adaptive metrics: zero iterations reduce to the euclidean query") {
    const ParticleTable table = testutil::random_table(120, 33);
    const AdaptiveResult r = adaptive_metric_knn(table, 6, 0);
    const Octree tree = Octree::build(table, 16);
    const NeighborRelation want = build_relation(tree, table, 6, MetricTensor::euclidean());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(r.metrics[i].kind() == MetricKind::euclidean);
        const auto a = r.relation.neighbors(static_cast<ParticleId>(i));
        const auto b = want.neighbors(static_cast<ParticleId>(i));
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}

TEST_CASE("adaptive metrics: lattice interior stays isotropic") {
    const ParticleTable table = testutil::lattice_table(9);
    const AdaptiveResult r = adaptive_metric_knn(table, 33, 2);
    const ParticleId center = static_cast<ParticleId>(testutil::lattice_id(9, 4, 4, 4));
    const Mat3& m = r.metrics[center].form();
    CHECK(std::abs(m(0, 1)) < 1e-8);
    CHECK(std::abs(m(0, 2)) < 1e-8);
    CHECK(std::abs(m(1, 2)) < 1e-8);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(m(a, a) - 1.0) < 1e-6);
}

TEST_CASE("adaptive metrics: flattened cloud points its stiff axis out of plane") {
    Rng rng(4242);
    std::vector<Vec3> positions;
    for (int i = 0; i < 400; ++i) {
        positions.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0});
    }
    const ParticleTable table = ParticleTable::create(std::vector<double>(400, 1.0), positions,
                                                      std::vector<Vec3>(400));
    const AdaptiveResult r = adaptive_metric_knn(table, 16, 2);
    // Pick a particle near the middle of the slab.
    ParticleId mid = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double d = norm2(positions[i]);
        if (d < best) { best = d; mid = static_cast<ParticleId>(i); }
    }
    const SymEigen3 e = eigen_sym3(r.metrics[mid].form());
    // Largest eigenvalue of the form = shortest ellipsoid axis = out of plane.
    const double angle = std::acos(std::min(1.0, std::abs(e.vectors[0].z)));
    CHECK(angle < 1e-6);
}

TEST_CASE("knn with per-particle metrics matches per-id queries") {
    const ParticleTable table = testutil::random_table(80, 21);
    const AdaptiveResult r = adaptive_metric_knn(table, 10, 1);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto want = testutil::brute_knn(table.positions(), static_cast<ParticleId>(i), 10,
                                              r.metrics[i].form());
        const auto got = r.relation.neighbors(static_cast<ParticleId>(i));
        for (std::size_t rank = 0; rank < want.size(); ++rank) {
            CHECK(got[rank] == want[rank].second);
        }
    }
}
