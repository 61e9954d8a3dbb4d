#include "sphr/sph.hpp"

#include "sphr/errors.hpp"
#include "sphr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sphr {

namespace {

double support_from_xi_max(double xi_max) {
    // Zero k-th distance (isolated particle or fully coincident list) leaves
    // no neighbor-derived scale; fall back to one length unit.
    return xi_max > 0.0 ? std::sqrt(xi_max) : 1.0;
}

void check_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw InvalidArgument(std::string(what) + ": size mismatch (" + std::to_string(a)
                              + " vs " + std::to_string(b) + ")");
    }
}

std::span<const double> resolve_field(const ParticleTable& table, std::string_view name) {
    if (table.has_attribute(name)) return table.attribute(name);
    if (name == "rho") return table.densities();
    if (name == "P") return table.pressures();
    throw InvalidArgument("unknown attribute '" + std::string(name) + "'");
}

} // namespace

std::vector<KernelSpec> particle_specs(const ParticleTable& table,
                                       const NeighborRelation& relation) {
    check_same_size(table.size(), relation.size(), "particle_specs");
    std::vector<KernelSpec> specs;
    specs.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        specs.push_back(
            KernelSpec::isotropic(support_from_xi_max(relation.xi_max(static_cast<ParticleId>(i)))));
    }
    return specs;
}

std::vector<KernelSpec> particle_specs(const ParticleTable& table, const NeighborRelation& relation,
                                       const MetricTensor& metric) {
    if (metric.kind() == MetricKind::euclidean) return particle_specs(table, relation);
    check_same_size(table.size(), relation.size(), "particle_specs");
    std::vector<KernelSpec> specs;
    specs.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double xi_max = relation.xi_max(static_cast<ParticleId>(i));
        specs.push_back(KernelSpec::metric_adapted(metric, xi_max > 0.0 ? xi_max : 1.0));
    }
    return specs;
}

std::vector<KernelSpec> particle_specs(const ParticleTable& table, const NeighborRelation& relation,
                                       std::span<const MetricTensor> metrics) {
    check_same_size(table.size(), relation.size(), "particle_specs");
    check_same_size(table.size(), metrics.size(), "particle_specs metrics");
    std::vector<KernelSpec> specs;
    specs.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double xi_max = relation.xi_max(static_cast<ParticleId>(i));
        if (metrics[i].kind() == MetricKind::euclidean) {
            specs.push_back(KernelSpec::isotropic(support_from_xi_max(xi_max)));
        } else {
            specs.push_back(KernelSpec::metric_adapted(metrics[i], xi_max > 0.0 ? xi_max : 1.0));
        }
    }
    return specs;
}

PairTerms build_pair_terms(const ParticleTable& table, const EffectiveNeighbors& effective,
                           std::span<const KernelSpec> specs) {
    check_same_size(table.size(), effective.size(), "build_pair_terms");
    check_same_size(table.size(), specs.size(), "build_pair_terms specs");

    const std::size_t n = table.size();
    PairTerms terms;
    terms.offsets_.resize(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        terms.offsets_[i + 1] = terms.offsets_[i] + effective.of(static_cast<ParticleId>(i)).size();
    }
    const std::size_t total = terms.offsets_[n];
    terms.ids_.resize(total);
    terms.w_.resize(total);
    terms.grad_w_.resize(total);
    terms.xi_.resize(total);
    terms.support_.resize(n);

    const auto positions = table.positions();
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            terms.support_[i] = specs[i].support_length();
            std::size_t slot = terms.offsets_[i];
            for (const ParticleId j : effective.of(static_cast<ParticleId>(i))) {
                const Vec3 dx = positions[i] - positions[j];
                // pair_spec(s, s) is the identity, so self rows take the
                // particle's own spec without the averaging detour.
                const KernelSpec sp =
                    (j == static_cast<ParticleId>(i)) ? specs[i] : pair_spec(specs[i], specs[j]);
                terms.ids_[slot] = j;
                terms.w_[slot] = sp.value(dx);
                terms.grad_w_[slot] = sp.gradient(dx);
                terms.xi_[slot] = quad_form(sp.form(), dx);
                ++slot;
            }
        }
    });
    return terms;
}

std::vector<double> compute_density(const ParticleTable& table, const PairTerms& terms) {
    check_same_size(table.size(), terms.rows(), "compute_density");
    const auto masses = table.masses();
    std::vector<double> rho(table.size(), 0.0);
    parallel_for(table.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = terms.row(static_cast<ParticleId>(i));
            double sum = 0.0;
            for (std::size_t s = 0; s < row.ids.size(); ++s) {
                sum += row.w[s] * masses[row.ids[s]];
            }
            rho[i] = sum;
        }
    });
    return rho;
}

std::vector<double> apply_eos(const ParticleTable& table, const EosParams& eos) {
    if (!(eos.K >= 0.0) || !std::isfinite(eos.K)) {
        throw InvalidArgument("EOS coefficient K must be finite and >= 0, got "
                              + std::to_string(eos.K));
    }
    if (!(eos.gamma >= 1.0) || !std::isfinite(eos.gamma)) {
        throw InvalidArgument("EOS exponent gamma must be finite and >= 1, got "
                              + std::to_string(eos.gamma));
    }
    table.require_positive_densities();
    const auto rho = table.densities();
    std::vector<double> pressure(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        pressure[i] = eos.gamma == 1.0 ? eos.K * rho[i] : eos.K * std::pow(rho[i], eos.gamma);
    }
    return pressure;
}

double interpolate_scalar(const ParticleTable& table, const PairTerms& terms,
                          std::span<const double> values, ParticleId i) {
    check_same_size(table.size(), terms.rows(), "interpolate_scalar");
    check_same_size(table.size(), values.size(), "interpolate_scalar values");
    table.require_positive_densities();
    const auto masses = table.masses();
    const auto rho = table.densities();
    const auto row = terms.row(i);
    double sum = 0.0;
    for (std::size_t s = 0; s < row.ids.size(); ++s) {
        const ParticleId j = row.ids[s];
        sum += row.w[s] * values[j] * masses[j] / rho[j];
    }
    return sum;
}

double interpolate_scalar(const ParticleTable& table, const PairTerms& terms,
                          std::string_view attribute, ParticleId i) {
    return interpolate_scalar(table, terms, resolve_field(table, attribute), i);
}

Vec3 interpolate_gradient(const ParticleTable& table, const PairTerms& terms,
                          std::span<const double> values, ParticleId i) {
    check_same_size(table.size(), terms.rows(), "interpolate_gradient");
    check_same_size(table.size(), values.size(), "interpolate_gradient values");
    table.require_positive_densities();
    const auto masses = table.masses();
    const auto rho = table.densities();
    const auto row = terms.row(i);
    Vec3 sum{};
    for (std::size_t s = 0; s < row.ids.size(); ++s) {
        const ParticleId j = row.ids[s];
        sum += row.grad_w[s] * (values[j] * masses[j] / rho[j]);
    }
    return sum;
}

Vec3 interpolate_gradient(const ParticleTable& table, const PairTerms& terms,
                          std::string_view attribute, ParticleId i) {
    return interpolate_gradient(table, terms, resolve_field(table, attribute), i);
}

std::vector<Vec3> compute_forces(const ParticleTable& table, const PairTerms& terms,
                                 const ForceConfig& cfg) {
    check_same_size(table.size(), terms.rows(), "compute_forces");
    table.require_positive_densities();

    const std::size_t n = table.size();
    const auto rho = table.densities();
    const auto pressure = table.pressures();
    const auto positions = table.positions();
    const auto velocities = table.velocities();

    std::vector<double> p_over_rho2(n);
    std::vector<double> sound(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(pressure[i])) {
            throw NumericError("NaN pressure (index " + std::to_string(i) + ")");
        }
        p_over_rho2[i] = pressure[i] / (rho[i] * rho[i]);
        sound[i] = std::sqrt(cfg.eos.gamma * std::max(pressure[i], 0.0) / rho[i]);
    }

    const auto masses = table.masses();
    const ViscosityParams& v = cfg.viscosity;
    std::vector<Vec3> accel(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            // Accumulate the pair force, not the acceleration: the scalar
            // m_i m_j Pi_ij is bitwise symmetric in (i, j), so mirrored
            // contributions negate exactly.
            Vec3 force{};
            const auto row = terms.row(static_cast<ParticleId>(i));
            for (std::size_t s = 0; s < row.ids.size(); ++s) {
                const ParticleId j = row.ids[s];
                if (j == static_cast<ParticleId>(i)) continue;
                double pi_ij = p_over_rho2[i] + p_over_rho2[j];
                if (v.alpha > 0.0 || v.beta > 0.0) {
                    const Vec3 dx = positions[i] - positions[j];
                    const Vec3 dv = velocities[i] - velocities[j];
                    const double vx = dot(dv, dx);
                    if (vx < 0.0) { // approaching pairs only
                        const double h_bar = 0.5 * (terms.support(static_cast<ParticleId>(i))
                                                    + terms.support(j));
                        const double mu = h_bar * vx / (norm2(dx) + v.epsilon * h_bar * h_bar);
                        const double c_bar = 0.5 * (sound[i] + sound[j]);
                        const double rho_bar = 0.5 * (rho[i] + rho[j]);
                        pi_ij += (-v.alpha * c_bar * mu + v.beta * mu * mu) / rho_bar;
                    }
                }
                force -= (masses[i] * masses[j] * pi_ij) * row.grad_w[s];
            }
            Vec3 a = force / masses[i];
            if (cfg.external_force) a += cfg.external_force(positions[i]);
            accel[i] = a;
        }
    });
    return accel;
}

StepDiagnostics measure(const ParticleTable& table) {
    StepDiagnostics d;
    const auto masses = table.masses();
    const auto velocities = table.velocities();
    const auto rho = table.densities();
    d.min_density = std::numeric_limits<double>::infinity();
    d.max_density = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.size(); ++i) {
        d.total_momentum += masses[i] * velocities[i];
        d.kinetic_energy += 0.5 * masses[i] * norm2(velocities[i]);
        d.min_density = std::min(d.min_density, rho[i]);
        d.max_density = std::max(d.max_density, rho[i]);
    }
    return d;
}

LeapfrogStepper::LeapfrogStepper(ParticleTable& table, AccelComputer pipeline)
    : table_(table), pipeline_(std::move(pipeline)) {
    if (!pipeline_) {
        throw InvalidArgument("LeapfrogStepper needs a pipeline");
    }
}

void LeapfrogStepper::prime() {
    if (primed_) return;
    accel_ = pipeline_(table_);
    check_same_size(table_.size(), accel_.size(), "pipeline accelerations");
    primed_ = true;
}

StepDiagnostics LeapfrogStepper::advance(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("dt must be positive and finite, got " + std::to_string(dt));
    }
    prime();

    const auto positions = table_.positions();
    const auto velocities = table_.velocities();
    const std::size_t n = table_.size();

    auto ensure_finite = [&](std::uint64_t at_step) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!is_finite(positions[i]) || !is_finite(velocities[i])) {
                throw NumericError("non-finite state after step " + std::to_string(at_step)
                                   + " (particle " + std::to_string(i) + ")");
            }
        }
    };

    // Kick-drift: v half-step on a(x), then x full step.
    for (std::size_t i = 0; i < n; ++i) {
        velocities[i] += (0.5 * dt) * accel_[i];
        positions[i] += dt * velocities[i];
    }
    ensure_finite(step_ + 1); // before the pipeline sees the drifted positions

    // Recompute a(x') and finish the kick.
    accel_ = pipeline_(table_);
    check_same_size(n, accel_.size(), "pipeline accelerations");
    for (std::size_t i = 0; i < n; ++i) {
        velocities[i] += (0.5 * dt) * accel_[i];
    }

    ++step_;
    time_ += dt;
    ensure_finite(step_);
    return measure(table_);
}

StepDiagnostics step(ParticleTable& table, double dt, const AccelComputer& pipeline) {
    LeapfrogStepper stepper(table, pipeline);
    return stepper.advance(dt);
}

} // namespace sphr
