#pragma once

#include "sphr/math.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sphr {

using ParticleId = std::uint32_t;

/// Per-particle state of one configuration, stored as parallel per-field arrays
/// keyed by dense ids 0..n-1. The field passes (density, forces) stream one
/// array at a time.
///
/// Masses are fixed at construction. Densities and pressures start at zero and
/// are treated as unset until the first density/equation-of-state pass;
/// consumers that need them positive check and fail loudly.
class ParticleTable {
public:
    ParticleTable() = default;

    /// Validates and builds a table; densities and pressures zero-initialized,
    /// no attributes. Throws InvalidArgument naming the offending index on
    /// length mismatch, non-positive mass, or non-finite input.
    static ParticleTable create(std::vector<double> masses, std::vector<Vec3> positions,
                                std::vector<Vec3> velocities);

    std::size_t size() const noexcept { return mass_.size(); }

    std::span<const double> masses() const noexcept { return mass_; }

    std::span<const Vec3> positions() const noexcept { return position_; }
    std::span<Vec3> positions() noexcept { return position_; }

    std::span<const Vec3> velocities() const noexcept { return velocity_; }
    std::span<Vec3> velocities() noexcept { return velocity_; }

    std::span<const double> densities() const noexcept { return density_; }
    std::span<double> densities() noexcept { return density_; }

    std::span<const double> pressures() const noexcept { return pressure_; }
    std::span<double> pressures() noexcept { return pressure_; }

    /// Replaces the density column; values must be finite and non-negative.
    void set_densities(std::vector<double> rho);

    /// Replaces the pressure column; values must be finite.
    void set_pressures(std::vector<double> pressure);

    /// Throws NumericError naming the first offender unless every density > 0.
    void require_positive_densities() const;

    bool has_attribute(std::string_view name) const;

    /// Adds or overwrites a named scalar column (must have n entries).
    void set_attribute(std::string_view name, std::vector<double> values);

    /// Throws InvalidArgument on unknown names.
    std::span<const double> attribute(std::string_view name) const;

    /// Attribute names in their stored (lexicographic) order.
    std::vector<std::string> attribute_names() const;

private:
    std::vector<double> mass_;
    std::vector<Vec3> position_;
    std::vector<Vec3> velocity_;
    std::vector<double> density_;
    std::vector<double> pressure_;
    std::map<std::string, std::vector<double>, std::less<>> attributes_;
};

/// A timestamped copy of the full particle state. An ordered sequence of these
/// is the history a run leaves behind.
struct Snapshot {
    double time = 0.0;
    std::uint64_t step = 0;
    ParticleTable table;
};

} // namespace sphr
