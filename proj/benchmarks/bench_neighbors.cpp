#include "sphr/neighbors.hpp"
#include "sphr/random.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

sphr::ParticleTable random_table(std::size_t n, std::uint64_t seed) {
    sphr::Rng rng(seed);
    std::vector<double> masses(n, 1.0);
    std::vector<sphr::Vec3> positions;
    positions.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        positions.push_back({rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10)});
    }
    return sphr::ParticleTable::create(std::move(masses), std::move(positions),
                                       std::vector<sphr::Vec3>(n));
}

void BM_octree_build(benchmark::State& state) {
    const auto table = random_table(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sphr::Octree::build(table, 16));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_octree_build)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_knn_relation_euclidean(benchmark::State& state) {
    const auto table = random_table(static_cast<std::size_t>(state.range(0)), 7);
    const auto tree = sphr::Octree::build(table, 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            sphr::build_relation(tree, table, 33, sphr::MetricTensor::euclidean()));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_knn_relation_euclidean)->Arg(1000)->Arg(10000);

void BM_knn_relation_anisotropic(benchmark::State& state) {
    const auto table = random_table(static_cast<std::size_t>(state.range(0)), 7);
    const auto tree = sphr::Octree::build(table, 16);
    const auto metric = sphr::MetricTensor::from_form(sphr::Mat3::diagonal(4, 1, 1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sphr::build_relation(tree, table, 33, metric));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_knn_relation_anisotropic)->Arg(1000)->Arg(10000);

void BM_adaptive_metric_knn(benchmark::State& state) {
    const auto table = random_table(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sphr::adaptive_metric_knn(table, 33, 2));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_adaptive_metric_knn)->Arg(1000)->Arg(10000);

} // namespace
