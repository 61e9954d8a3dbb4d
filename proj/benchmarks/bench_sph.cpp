#include "sphr/pipeline.hpp"
#include "sphr/scenario.hpp"
#include "sphr/sph.hpp"

#include <benchmark/benchmark.h>

namespace {

sphr::ParticleTable lattice_table(int side) {
    sphr::Scenario s;
    s.lattice.dims = {side, side, side};
    return sphr::build_initial_table(s);
}

void BM_density_pass(benchmark::State& state) {
    const auto table = lattice_table(static_cast<int>(state.range(0)));
    const auto tree = sphr::Octree::build(table, 16);
    const auto relation = sphr::build_relation(tree, table, 33, sphr::MetricTensor::euclidean());
    const auto effective = sphr::symmetric_closure(relation);
    const auto specs = sphr::particle_specs(table, relation);
    const auto terms = sphr::build_pair_terms(table, effective, specs);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sphr::compute_density(table, terms));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(table.size()));
}
BENCHMARK(BM_density_pass)->Arg(8)->Arg(16)->Arg(24);

void BM_pair_terms(benchmark::State& state) {
    const auto table = lattice_table(static_cast<int>(state.range(0)));
    const auto tree = sphr::Octree::build(table, 16);
    const auto relation = sphr::build_relation(tree, table, 33, sphr::MetricTensor::euclidean());
    const auto effective = sphr::symmetric_closure(relation);
    const auto specs = sphr::particle_specs(table, relation);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sphr::build_pair_terms(table, effective, specs));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(table.size()));
}
BENCHMARK(BM_pair_terms)->Arg(8)->Arg(16);

void BM_full_step(benchmark::State& state) {
    auto table = lattice_table(static_cast<int>(state.range(0)));
    sphr::SphPipeline pipeline(sphr::NeighborConfig{}, sphr::ForceConfig{});
    sphr::LeapfrogStepper stepper(table, std::ref(pipeline));
    stepper.prime();
    for (auto _ : state) {
        benchmark::DoNotOptimize(stepper.advance(1e-4));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(table.size()));
}
BENCHMARK(BM_full_step)->Arg(8)->Arg(16);

} // namespace
