#include "sphr/particles.hpp"

#include "sphr/errors.hpp"

#include <cmath>
#include <string>

namespace sphr {

ParticleTable ParticleTable::create(std::vector<double> masses, std::vector<Vec3> positions,
                                    std::vector<Vec3> velocities) {
    const std::size_t n = masses.size();
    if (n == 0) {
        throw InvalidArgument("particle table needs at least one particle");
    }
    if (positions.size() != n || velocities.size() != n) {
        throw InvalidArgument("field length mismatch: " + std::to_string(n) + " masses, "
                              + std::to_string(positions.size()) + " positions, "
                              + std::to_string(velocities.size()) + " velocities");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(masses[i]) || masses[i] <= 0.0) {
            throw InvalidArgument("mass must be positive and finite (index " + std::to_string(i)
                                  + ", value " + std::to_string(masses[i]) + ")");
        }
        if (!is_finite(positions[i])) {
            throw InvalidArgument("non-finite position (index " + std::to_string(i) + ")");
        }
        if (!is_finite(velocities[i])) {
            throw InvalidArgument("non-finite velocity (index " + std::to_string(i) + ")");
        }
    }
    ParticleTable t;
    t.mass_ = std::move(masses);
    t.position_ = std::move(positions);
    t.velocity_ = std::move(velocities);
    t.density_.assign(n, 0.0);
    t.pressure_.assign(n, 0.0);
    return t;
}

void ParticleTable::set_densities(std::vector<double> rho) {
    if (rho.size() != size()) {
        throw InvalidArgument("density column has " + std::to_string(rho.size())
                              + " entries, table has " + std::to_string(size()));
    }
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!std::isfinite(rho[i]) || rho[i] < 0.0) {
            throw NumericError("invalid density (index " + std::to_string(i) + ", value "
                               + std::to_string(rho[i]) + ")");
        }
    }
    density_ = std::move(rho);
}

void ParticleTable::set_pressures(std::vector<double> pressure) {
    if (pressure.size() != size()) {
        throw InvalidArgument("pressure column has " + std::to_string(pressure.size())
                              + " entries, table has " + std::to_string(size()));
    }
    for (std::size_t i = 0; i < pressure.size(); ++i) {
        if (!std::isfinite(pressure[i])) {
            throw NumericError("non-finite pressure (index " + std::to_string(i) + ")");
        }
    }
    pressure_ = std::move(pressure);
}

void ParticleTable::require_positive_densities() const {
    for (std::size_t i = 0; i < density_.size(); ++i) {
        if (!(density_[i] > 0.0)) {
            throw NumericError("density not positive (index " + std::to_string(i)
                               + "); run a density pass first");
        }
    }
}

bool ParticleTable::has_attribute(std::string_view name) const {
    return attributes_.find(name) != attributes_.end();
}

void ParticleTable::set_attribute(std::string_view name, std::vector<double> values) {
    if (values.size() != size()) {
        throw InvalidArgument("attribute '" + std::string(name) + "' has "
                              + std::to_string(values.size()) + " entries, table has "
                              + std::to_string(size()));
    }
    attributes_.insert_or_assign(std::string(name), std::move(values));
}

std::span<const double> ParticleTable::attribute(std::string_view name) const {
    const auto it = attributes_.find(name);
    if (it == attributes_.end()) {
        throw InvalidArgument("unknown attribute '" + std::string(name) + "'");
    }
    return it->second;
}

std::vector<std::string> ParticleTable::attribute_names() const {
    std::vector<std::string> names;
    names.reserve(attributes_.size());
    for (const auto& [name, _] : attributes_) names.push_back(name);
    return names;
}

} // namespace sphr
