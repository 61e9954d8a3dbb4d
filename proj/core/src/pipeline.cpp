#include "sphr/pipeline.hpp"

#include "sphr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sphr {

SphPipeline::SphPipeline(NeighborConfig neighbors, ForceConfig forces)
    : neighbors_(std::move(neighbors)), forces_(std::move(forces)) {
    if (neighbors_.k < 1) {
        throw InvalidArgument("neighbor count k must be >= 1, got " + std::to_string(neighbors_.k));
    }
    if (neighbors_.metric == MetricKind::stress && !neighbors_.stress_tensor) {
        throw InvalidArgument("stress metric needs a stress tensor");
    }
}

std::vector<Vec3> SphPipeline::operator()(ParticleTable& table) {
    std::vector<KernelSpec> specs;
    switch (neighbors_.metric) {
    case MetricKind::euclidean: {
        const Octree tree = Octree::build(table, neighbors_.leaf_capacity);
        relation_ = build_relation(tree, table, neighbors_.k, MetricTensor::euclidean());
        specs = particle_specs(table, *relation_);
        break;
    }
    case MetricKind::mahalanobis: {
        AdaptiveResult adapted =
            adaptive_metric_knn(table, neighbors_.k, neighbors_.adaptive_iterations,
                                neighbors_.floor_fraction, neighbors_.leaf_capacity);
        relation_ = std::move(adapted.relation);
        specs = particle_specs(table, *relation_, adapted.metrics);
        break;
    }
    case MetricKind::stress: {
        const MetricTensor metric =
            invert_spd(*neighbors_.stress_tensor, neighbors_.floor_fraction, MetricKind::stress);
        const Octree tree = Octree::build(table, neighbors_.leaf_capacity);
        relation_ = build_relation(tree, table, neighbors_.k, metric);
        specs = particle_specs(table, *relation_, metric);
        break;
    }
    }

    const EffectiveNeighbors effective = symmetric_closure(*relation_);
    terms_ = build_pair_terms(table, effective, specs);
    table.set_densities(compute_density(table, *terms_));
    table.set_pressures(apply_eos(table, forces_.eos));
    std::vector<Vec3> accel = compute_forces(table, *terms_, forces_);

    // CFL-style diagnostic: smallest support over the largest signal speed.
    min_support_ = *std::min_element(terms_->supports().begin(), terms_->supports().end());
    max_sound_speed_ = 0.0;
    cfl_dt_ = std::numeric_limits<double>::infinity();
    const auto rho = table.densities();
    const auto pressure = table.pressures();
    const auto velocities = table.velocities();
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double c = std::sqrt(forces_.eos.gamma * std::max(pressure[i], 0.0) / rho[i]);
        max_sound_speed_ = std::max(max_sound_speed_, c);
        const double signal = std::max({c, norm(velocities[i]), 1e-300});
        cfl_dt_ = std::min(cfl_dt_, terms_->support(static_cast<ParticleId>(i)) / signal);
    }
    return accel;
}

const NeighborRelation& SphPipeline::relation() const {
    if (!relation_) throw Error("pipeline has not run yet");
    return *relation_;
}

const PairTerms& SphPipeline::terms() const {
    if (!terms_) throw Error("pipeline has not run yet");
    return *terms_;
}

} // namespace sphr
