#pragma once

#include "sphr/kernel.hpp"
#include "sphr/neighbors.hpp"
#include "sphr/particles.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace sphr {

/// Barotropic closure P = K rho^gamma.
struct EosParams {
    double K = 1.0;
    double gamma = 5.0 / 3.0;
};

/// Monaghan-style artificial viscosity coefficients; alpha = beta = 0 turns
/// dissipation off.
struct ViscosityParams {
    double alpha = 1.0;
    double beta = 2.0;
    double epsilon = 0.01;
};

/// Non-hydrodynamic acceleration field evaluated at a particle position.
using ExternalForce = std::function<Vec3(const Vec3&)>;

struct ForceConfig {
    EosParams eos;
    ViscosityParams viscosity;
    ExternalForce external_force; ///< empty means no external field
};

/// Kernel weights, gradients and squared distances for every effective-neighbor
/// pair, in compressed sparse rows parallel to the closure's rows. Each
/// directed entry is evaluated with the shared pair spec, so the stored values
/// satisfy w(i,j) = w(j,i) and grad(i,j) = -grad(j,i) exactly.
class PairTerms {
public:
    struct Row {
        std::span<const ParticleId> ids;
        std::span<const double> w;
        std::span<const Vec3> grad_w;
        std::span<const double> xi;
    };

    std::size_t rows() const noexcept { return offsets_.size() - 1; }

    Row row(ParticleId i) const {
        const std::size_t b = offsets_[i];
        const std::size_t e = offsets_[i + 1];
        return Row{{ids_.data() + b, e - b},
                   {w_.data() + b, e - b},
                   {grad_w_.data() + b, e - b},
                   {xi_.data() + b, e - b}};
    }

    /// Per-particle support length (h for isotropic specs).
    double support(ParticleId i) const { return support_[i]; }
    std::span<const double> supports() const noexcept { return support_; }

private:
    friend PairTerms build_pair_terms(const ParticleTable&, const EffectiveNeighbors&,
                                      std::span<const KernelSpec>);

    std::vector<std::size_t> offsets_;
    std::vector<ParticleId> ids_;
    std::vector<double> w_;
    std::vector<Vec3> grad_w_;
    std::vector<double> xi_;
    std::vector<double> support_;
};

/// Per-particle kernel specs driven by the neighbor machinery: the support is
/// set by the k-th neighbor distance (h_i = sqrt(xi_max) for the Euclidean
/// metric, the unit-xi_max ellipsoid of the particle's form otherwise).
/// Particles whose k-th distance is zero (isolated or fully coincident lists)
/// fall back to a support of one length unit.
std::vector<KernelSpec> particle_specs(const ParticleTable& table, const NeighborRelation& relation);
std::vector<KernelSpec> particle_specs(const ParticleTable& table, const NeighborRelation& relation,
                                       const MetricTensor& metric);
std::vector<KernelSpec> particle_specs(const ParticleTable& table, const NeighborRelation& relation,
                                       std::span<const MetricTensor> metrics);

PairTerms build_pair_terms(const ParticleTable& table, const EffectiveNeighbors& effective,
                           std::span<const KernelSpec> specs);

/// rho_i = sum_j W_ij m_j over the effective rows; positive by construction
/// (the self term never vanishes).
std::vector<double> compute_density(const ParticleTable& table, const PairTerms& terms);

/// P_i = K rho_i^gamma. Requires positive densities.
std::vector<double> apply_eos(const ParticleTable& table, const EosParams& eos);

/// Kernel-weighted estimate sum_j W_ij A_j m_j / rho_j of a field at particle i.
double interpolate_scalar(const ParticleTable& table, const PairTerms& terms,
                          std::span<const double> values, ParticleId i);

/// Name-resolved variant: named attributes first, then the built-in columns
/// "rho" and "P".
double interpolate_scalar(const ParticleTable& table, const PairTerms& terms,
                          std::string_view attribute, ParticleId i);

/// Kernel-weighted gradient estimate sum_j grad_i W_ij A_j m_j / rho_j.
Vec3 interpolate_gradient(const ParticleTable& table, const PairTerms& terms,
                          std::span<const double> values, ParticleId i);

Vec3 interpolate_gradient(const ParticleTable& table, const PairTerms& terms,
                          std::string_view attribute, ParticleId i);

/// Momentum equation: dv_i/dt = -sum_j m_j Pi_ij grad_i W_ij + F_i with the
/// symmetric pressure factor Pi_ij = P_i/rho_i^2 + P_j/rho_j^2 plus artificial
/// viscosity. Internally accumulated as pair forces m_i m_j Pi_ij grad_i W_ij,
/// which cancel bitwise against their mirrors; the total momentum of an
/// isolated system is conserved to roundoff.
std::vector<Vec3> compute_forces(const ParticleTable& table, const PairTerms& terms,
                                 const ForceConfig& cfg);

struct StepDiagnostics {
    Vec3 total_momentum;
    double kinetic_energy = 0.0;
    double min_density = 0.0;
    double max_density = 0.0;
};

/// Rebuilds whatever the force evaluation needs for the current positions
/// (neighbors, pair terms, density, pressure) and returns the accelerations.
/// Expected to update the table's density and pressure columns in place.
using AccelComputer = std::function<std::vector<Vec3>(ParticleTable&)>;

/// Kick-drift-kick leapfrog. Accelerations at the current positions are
/// evaluated once at the first advance and then carried over from the end of
/// each step, so one advance costs one pipeline evaluation.
class LeapfrogStepper {
public:
    LeapfrogStepper(ParticleTable& table, AccelComputer pipeline);

    /// One step of size dt > 0. Throws NumericError naming the step index if
    /// the state leaves the finite range.
    StepDiagnostics advance(double dt);

    /// Evaluates the pipeline at the current positions if that has not
    /// happened yet (fills the table's density and pressure columns). The
    /// first advance() reuses the result.
    void prime();

    std::uint64_t step_index() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    ParticleTable& table_;
    AccelComputer pipeline_;
    std::vector<Vec3> accel_;
    bool primed_ = false;
    std::uint64_t step_ = 0;
    double time_ = 0.0;
};

/// Single-shot step for callers that do not keep a stepper around.
StepDiagnostics step(ParticleTable& table, double dt, const AccelComputer& pipeline);

/// Diagnostics of the current table state.
StepDiagnostics measure(const ParticleTable& table);

} // namespace sphr
