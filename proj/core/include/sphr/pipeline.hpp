#pragma once

#include "sphr/sph.hpp"

#include <optional>

namespace sphr {

/// Neighbor-machinery knobs for a run.
struct NeighborConfig {
    int k = 33;
    MetricKind metric = MetricKind::euclidean;
    int adaptive_iterations = 2;   ///< mahalanobis kind only
    double floor_fraction = 1e-3;
    std::uint32_t leaf_capacity = 16;
    std::optional<Mat3> stress_tensor; ///< required by the stress kind (the tensor itself, not its inverse)
};

/// One full force evaluation at the current positions: rebuild neighbors,
/// pair terms, density, pressure, then accelerations. The table's density and
/// pressure columns are updated in place. Neighbor structures are rebuilt
/// every call; the most recent ones stay readable for diagnostics.
class SphPipeline {
public:
    SphPipeline(NeighborConfig neighbors, ForceConfig forces);

    std::vector<Vec3> operator()(ParticleTable& table);

    const NeighborConfig& neighbor_config() const noexcept { return neighbors_; }
    const ForceConfig& force_config() const noexcept { return forces_; }

    /// State of the latest evaluation.
    const NeighborRelation& relation() const;
    const PairTerms& terms() const;
    double min_support() const noexcept { return min_support_; }
    double max_sound_speed() const noexcept { return max_sound_speed_; }

    /// Suggested stable step, min over particles of h / max(c, |v|); the run
    /// driver reports it next to the configured dt without enforcing it.
    double cfl_timestep() const noexcept { return cfl_dt_; }

private:
    NeighborConfig neighbors_;
    ForceConfig forces_;
    std::optional<NeighborRelation> relation_;
    std::optional<PairTerms> terms_;
    double min_support_ = 0.0;
    double max_sound_speed_ = 0.0;
    double cfl_dt_ = 0.0;
};

} // namespace sphr
