#pragma once

#include "sphr/particles.hpp"
#include "sphr/pipeline.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace sphr {

enum class GeneratorKind { lattice, gaussian_cloud, two_body, file };

/// Regular grid of particles; optionally wrapped by a layer of ghost copies so
/// boundary neighborhoods look like interior ones. Ghosts are ordinary
/// particles marked by the "ghost" attribute (1 for copies, 0 for originals).
struct LatticeParams {
    std::array<int, 3> dims{10, 10, 10};
    double spacing = 1.0;
    double mass = 1.0;
    Vec3 velocity{};
    double velocity_jitter = 0.0; ///< stddev of seeded Gaussian velocity noise
    bool periodic = false;
};

struct GaussianCloudParams {
    int count = 1000;
    Mat3 covariance = Mat3::identity();
    Vec3 center{};
    double mass = 1.0;
    Vec3 velocity{};
};

/// Two equal masses on the x axis with opposite y velocities.
struct TwoBodyParams {
    double separation = 1.0;
    double mass = 1.0;
    double speed = 0.0;
};

struct FileParams {
    std::string path; ///< a snapshot file providing the initial state
};

struct ScenarioPhysics {
    EosParams eos;
    ViscosityParams viscosity;
    Vec3 uniform_external_force{}; ///< zero vector means no external field
};

struct RunParams {
    double dt = 1e-3;
    std::uint64_t steps = 0;
    std::uint64_t snapshot_interval = 1;
    std::uint64_t seed = 0;
};

struct Scenario {
    GeneratorKind generator = GeneratorKind::lattice;
    LatticeParams lattice;
    GaussianCloudParams cloud;
    TwoBodyParams two_body;
    FileParams file;
    ScenarioPhysics physics;
    NeighborConfig neighbors;
    RunParams run;
};

/// Parses and validates a scenario document (JSON). Parse failures report the
/// line, constraint violations name the offending field.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::string& origin);

void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario);

/// Instantiates the particle table a scenario describes; generation is
/// deterministic in run.seed.
ParticleTable build_initial_table(const Scenario& scenario);

ForceConfig make_force_config(const ScenarioPhysics& physics);

} // namespace sphr
