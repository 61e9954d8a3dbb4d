#pragma once

#include "sphr/metric.hpp"
#include "sphr/octree.hpp"
#include "sphr/particles.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sphr {

/// One particle's ordered k-nearest list: the particle itself at rank 0 at
/// distance zero, then the remaining ids by nondecreasing squared distance,
/// ties broken towards the smaller id.
struct NeighborList {
    std::vector<ParticleId> ids;
    std::vector<double> xi;

    double xi_max() const { return xi.back(); }
};

/// The k-NN relation over all particles: reflexive, generally asymmetric.
/// Row i is the ordered list for particle i (self at rank 0).
class NeighborRelation {
public:
    NeighborRelation(int k, std::size_t n)
        : k_(k), ids_(n * static_cast<std::size_t>(k)), xi_(n * static_cast<std::size_t>(k)) {}

    int k() const noexcept { return k_; }
    std::size_t size() const noexcept { return ids_.size() / static_cast<std::size_t>(k_); }

    std::span<const ParticleId> neighbors(ParticleId i) const {
        return {ids_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)};
    }
    std::span<const double> distances(ParticleId i) const {
        return {xi_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)};
    }
    double xi_max(ParticleId i) const { return distances(i).back(); }

    std::span<ParticleId> row_ids(ParticleId i) {
        return {ids_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)};
    }
    std::span<double> row_xi(ParticleId i) {
        return {xi_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)};
    }

private:
    int k_;
    std::vector<ParticleId> ids_;
    std::vector<double> xi_;
};

/// Symmetric closure of a k-NN relation: the union of the relation with its
/// transpose. Stored as per-row sorted id lists (compressed sparse rows).
class EffectiveNeighbors {
public:
    EffectiveNeighbors(std::vector<std::size_t> offsets, std::vector<ParticleId> ids)
        : offsets_(std::move(offsets)), ids_(std::move(ids)) {}

    std::size_t size() const noexcept { return offsets_.size() - 1; }
    std::size_t pair_count() const noexcept { return ids_.size(); }

    std::span<const ParticleId> of(ParticleId i) const {
        return {ids_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    bool contains(ParticleId i, ParticleId j) const;

private:
    std::vector<std::size_t> offsets_; ///< n + 1
    std::vector<ParticleId> ids_;      ///< ascending within each row
};

/// k nearest ids of particle i under metric `m`, exact: matches a brute-force
/// scan under the same tie rule. Anisotropy enters the cell pruning bound
/// through the form's smallest eigenvalue.
NeighborList knn_query(const Octree& tree, const ParticleTable& table, ParticleId i, int k,
                       const MetricTensor& m);

/// Full relation under one shared metric; queries run in parallel over i.
NeighborRelation build_relation(const Octree& tree, const ParticleTable& table, int k,
                                const MetricTensor& m);

/// Full relation with one metric per particle (metrics.size() == n).
NeighborRelation build_relation(const Octree& tree, const ParticleTable& table, int k,
                                std::span<const MetricTensor> metrics);

EffectiveNeighbors symmetric_closure(const NeighborRelation& relation);

/// Iterative covariance adaptation: bootstrap with Euclidean k-NN, then each
/// iteration re-estimates a per-particle moment matrix over the current
/// neighbor lists (self excluded), inverts it with eigenvalue flooring,
/// det-normalizes, and re-queries. iterations = 0 is plain Euclidean k-NN.
struct AdaptiveResult {
    std::vector<MetricTensor> metrics;
    NeighborRelation relation;
};

AdaptiveResult adaptive_metric_knn(const ParticleTable& table, int k, int iterations = 2,
                                   double floor_fraction = 1e-3, std::uint32_t leaf_capacity = 16);

/// Reference O(n) scan used by the command-line oracle check; same contract
/// and tie rule as knn_query, no spatial index involved.
NeighborList brute_force_knn(const ParticleTable& table, ParticleId i, int k,
                             const MetricTensor& m);

} // namespace sphr
