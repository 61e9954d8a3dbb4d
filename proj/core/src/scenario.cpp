#include "sphr/scenario.hpp"

#include "sphr/errors.hpp"
#include "sphr/random.hpp"
#include "sphr/snapshot_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sphr {

using nlohmann::json;

namespace {

[[noreturn]] void fail_field(const std::string& field, const std::string& message) {
    throw InvalidArgument("scenario field '" + field + "': " + message);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            fail_field(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail_field(path + "." + key, "expected a number");
    return v.get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& path, const char* key,
                         std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail_field(path + "." + key, "expected an integer");
    return v.get<std::int64_t>();
}

/// Checked before the unsigned cast; a negative value must not wrap.
std::uint64_t get_unsigned(const json& obj, const std::string& path, const char* key,
                           std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (!v.is_number_integer()) fail_field(path + "." + key, "expected an integer");
    const auto raw = v.get<std::int64_t>();
    if (raw < 0) fail_field(path + "." + key, "must be >= 0");
    return static_cast<std::uint64_t>(raw);
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail_field(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

Vec3 get_vec3(const json& obj, const std::string& path, const char* key, const Vec3& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number()
        || !v[2].is_number()) {
        fail_field(path + "." + key, "expected an array of 3 numbers");
    }
    return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

/// Accepts [d0,d1,d2] (diagonal), [m00..m22] (row-major 9) or 3 nested rows.
Mat3 get_mat3(const json& v, const std::string& field) {
    if (v.is_array() && v.size() == 3 && v[0].is_number()) {
        return Mat3::diagonal(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    if (v.is_array() && v.size() == 9) {
        Mat3 m;
        for (int i = 0; i < 9; ++i) {
            if (!v[i].is_number()) fail_field(field, "expected numeric entries");
            m.a[i] = v[i].get<double>();
        }
        return m;
    }
    if (v.is_array() && v.size() == 3 && v[0].is_array()) {
        Mat3 m;
        for (int r = 0; r < 3; ++r) {
            const json& row = v[r];
            if (!row.is_array() || row.size() != 3) fail_field(field, "expected 3 rows of 3");
            for (int c = 0; c < 3; ++c) m(r, c) = row[c].get<double>();
        }
        return m;
    }
    fail_field(field, "expected a 3-vector diagonal, 9 numbers, or a 3x3 nested array");
}

json mat3_to_json(const Mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
    }
    return rows;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    return 1 + static_cast<std::size_t>(
               std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

void parse_generator(const json& g, Scenario& s) {
    check_keys(g, "generator",
               {"type", "dims", "spacing", "mass", "velocity", "velocity_jitter", "periodic",
                "count", "covariance", "center", "separation", "speed", "path"});
    const std::string type = g.contains("type") ? g.at("type").get<std::string>() : "lattice";
    if (type == "lattice") {
        s.generator = GeneratorKind::lattice;
        if (g.contains("dims")) {
            const json& d = g.at("dims");
            if (!d.is_array() || d.size() != 3) fail_field("generator.dims", "expected 3 integers");
            for (int a = 0; a < 3; ++a) s.lattice.dims[a] = d[a].get<int>();
        }
        s.lattice.spacing = get_number(g, "generator", "spacing", s.lattice.spacing);
        s.lattice.mass = get_number(g, "generator", "mass", s.lattice.mass);
        s.lattice.velocity = get_vec3(g, "generator", "velocity", s.lattice.velocity);
        s.lattice.velocity_jitter =
            get_number(g, "generator", "velocity_jitter", s.lattice.velocity_jitter);
        s.lattice.periodic = get_bool(g, "generator", "periodic", s.lattice.periodic);
    } else if (type == "gaussian_cloud") {
        s.generator = GeneratorKind::gaussian_cloud;
        s.cloud.count = static_cast<int>(get_integer(g, "generator", "count", s.cloud.count));
        if (g.contains("covariance")) {
            s.cloud.covariance = get_mat3(g.at("covariance"), "generator.covariance");
        }
        s.cloud.center = get_vec3(g, "generator", "center", s.cloud.center);
        s.cloud.mass = get_number(g, "generator", "mass", s.cloud.mass);
        s.cloud.velocity = get_vec3(g, "generator", "velocity", s.cloud.velocity);
    } else if (type == "two_body") {
        s.generator = GeneratorKind::two_body;
        s.two_body.separation = get_number(g, "generator", "separation", s.two_body.separation);
        s.two_body.mass = get_number(g, "generator", "mass", s.two_body.mass);
        s.two_body.speed = get_number(g, "generator", "speed", s.two_body.speed);
    } else if (type == "file") {
        s.generator = GeneratorKind::file;
        if (!g.contains("path")) fail_field("generator.path", "required for the file generator");
        s.file.path = g.at("path").get<std::string>();
    } else {
        fail_field("generator.type", "unknown generator '" + type + "'");
    }
}

void parse_physics(const json& p, Scenario& s) {
    check_keys(p, "physics", {"eos", "viscosity", "external_force"});
    if (p.contains("eos")) {
        const json& e = p.at("eos");
        check_keys(e, "physics.eos", {"K", "gamma"});
        s.physics.eos.K = get_number(e, "physics.eos", "K", s.physics.eos.K);
        s.physics.eos.gamma = get_number(e, "physics.eos", "gamma", s.physics.eos.gamma);
    }
    if (p.contains("viscosity")) {
        const json& v = p.at("viscosity");
        check_keys(v, "physics.viscosity", {"alpha", "beta", "epsilon"});
        s.physics.viscosity.alpha = get_number(v, "physics.viscosity", "alpha", s.physics.viscosity.alpha);
        s.physics.viscosity.beta = get_number(v, "physics.viscosity", "beta", s.physics.viscosity.beta);
        s.physics.viscosity.epsilon =
            get_number(v, "physics.viscosity", "epsilon", s.physics.viscosity.epsilon);
    }
    s.physics.uniform_external_force =
        get_vec3(p, "physics", "external_force", s.physics.uniform_external_force);
}

void parse_neighbors(const json& n, Scenario& s) {
    check_keys(n, "neighbors",
               {"k", "metric", "adaptive_iterations", "floor_fraction", "leaf_capacity",
                "stress_tensor"});
    s.neighbors.k = static_cast<int>(get_integer(n, "neighbors", "k", s.neighbors.k));
    if (n.contains("metric")) {
        const std::string m = n.at("metric").get<std::string>();
        if (m == "euclidean") s.neighbors.metric = MetricKind::euclidean;
        else if (m == "mahalanobis") s.neighbors.metric = MetricKind::mahalanobis;
        else if (m == "stress") s.neighbors.metric = MetricKind::stress;
        else fail_field("neighbors.metric", "unknown metric '" + m + "'");
    }
    s.neighbors.adaptive_iterations = static_cast<int>(
        get_integer(n, "neighbors", "adaptive_iterations", s.neighbors.adaptive_iterations));
    s.neighbors.floor_fraction =
        get_number(n, "neighbors", "floor_fraction", s.neighbors.floor_fraction);
    s.neighbors.leaf_capacity = static_cast<std::uint32_t>(std::min<std::uint64_t>(
        get_unsigned(n, "neighbors", "leaf_capacity", s.neighbors.leaf_capacity), 1u << 20));
    if (n.contains("stress_tensor")) {
        s.neighbors.stress_tensor = get_mat3(n.at("stress_tensor"), "neighbors.stress_tensor");
    }
}

void parse_run(const json& r, Scenario& s) {
    check_keys(r, "run", {"dt", "steps", "snapshot_interval", "seed"});
    s.run.dt = get_number(r, "run", "dt", s.run.dt);
    s.run.steps = get_unsigned(r, "run", "steps", s.run.steps);
    s.run.snapshot_interval = get_unsigned(r, "run", "snapshot_interval", s.run.snapshot_interval);
    s.run.seed = get_unsigned(r, "run", "seed", s.run.seed);
}

void validate(const Scenario& s) {
    if (s.neighbors.k < 1) fail_field("neighbors.k", "must be >= 1");
    if (!(s.neighbors.floor_fraction > 0.0) || s.neighbors.floor_fraction > 1.0) {
        fail_field("neighbors.floor_fraction", "must lie in (0, 1]");
    }
    if (s.neighbors.adaptive_iterations < 0) fail_field("neighbors.adaptive_iterations", "must be >= 0");
    if (s.neighbors.leaf_capacity < 1) fail_field("neighbors.leaf_capacity", "must be >= 1");
    if (s.neighbors.metric == MetricKind::stress && !s.neighbors.stress_tensor) {
        fail_field("neighbors.stress_tensor", "required for the stress metric");
    }
    if (!(s.run.dt > 0.0)) fail_field("run.dt", "must be > 0");
    if (s.run.snapshot_interval < 1) fail_field("run.snapshot_interval", "must be >= 1");
    if (!(s.physics.eos.K >= 0.0)) fail_field("physics.eos.K", "must be >= 0");
    if (!(s.physics.eos.gamma >= 1.0)) fail_field("physics.eos.gamma", "must be >= 1");
    if (!(s.physics.viscosity.alpha >= 0.0)) fail_field("physics.viscosity.alpha", "must be >= 0");
    if (!(s.physics.viscosity.beta >= 0.0)) fail_field("physics.viscosity.beta", "must be >= 0");
    if (!(s.physics.viscosity.epsilon > 0.0)) fail_field("physics.viscosity.epsilon", "must be > 0");
    switch (s.generator) {
    case GeneratorKind::lattice:
        for (int a = 0; a < 3; ++a) {
            if (s.lattice.dims[a] < 1) fail_field("generator.dims", "entries must be >= 1");
        }
        if (!(s.lattice.spacing > 0.0)) fail_field("generator.spacing", "must be > 0");
        if (!(s.lattice.mass > 0.0)) fail_field("generator.mass", "must be > 0");
        if (s.lattice.velocity_jitter < 0.0) fail_field("generator.velocity_jitter", "must be >= 0");
        break;
    case GeneratorKind::gaussian_cloud:
        if (s.cloud.count < 1) fail_field("generator.count", "must be >= 1");
        if (!(s.cloud.mass > 0.0)) fail_field("generator.mass", "must be > 0");
        if (!is_symmetric(s.cloud.covariance)) {
            fail_field("generator.covariance", "must be symmetric");
        }
        break;
    case GeneratorKind::two_body:
        if (!(s.two_body.separation > 0.0)) fail_field("generator.separation", "must be > 0");
        if (!(s.two_body.mass > 0.0)) fail_field("generator.mass", "must be > 0");
        break;
    case GeneratorKind::file:
        if (s.file.path.empty()) fail_field("generator.path", "must not be empty");
        break;
    }
}

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(origin + ": parse error at line "
                              + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw InvalidArgument(origin + ": scenario document must be an object");
    }
    check_keys(doc, "", {"generator", "physics", "neighbors", "run"});

    Scenario s;
    if (doc.contains("generator")) parse_generator(doc.at("generator"), s);
    if (doc.contains("physics")) parse_physics(doc.at("physics"), s);
    if (doc.contains("neighbors")) parse_neighbors(doc.at("neighbors"), s);
    if (doc.contains("run")) parse_run(doc.at("run"), s);
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open scenario file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.string());
}

std::string scenario_to_json(const Scenario& s) {
    json g;
    switch (s.generator) {
    case GeneratorKind::lattice:
        g = {{"type", "lattice"},
             {"dims", {s.lattice.dims[0], s.lattice.dims[1], s.lattice.dims[2]}},
             {"spacing", s.lattice.spacing},
             {"mass", s.lattice.mass},
             {"velocity", vec3_to_json(s.lattice.velocity)},
             {"velocity_jitter", s.lattice.velocity_jitter},
             {"periodic", s.lattice.periodic}};
        break;
    case GeneratorKind::gaussian_cloud:
        g = {{"type", "gaussian_cloud"},
             {"count", s.cloud.count},
             {"covariance", mat3_to_json(s.cloud.covariance)},
             {"center", vec3_to_json(s.cloud.center)},
             {"mass", s.cloud.mass},
             {"velocity", vec3_to_json(s.cloud.velocity)}};
        break;
    case GeneratorKind::two_body:
        g = {{"type", "two_body"},
             {"separation", s.two_body.separation},
             {"mass", s.two_body.mass},
             {"speed", s.two_body.speed}};
        break;
    case GeneratorKind::file:
        g = {{"type", "file"}, {"path", s.file.path}};
        break;
    }

    json n = {{"k", s.neighbors.k},
              {"metric", s.neighbors.metric == MetricKind::euclidean      ? "euclidean"
                         : s.neighbors.metric == MetricKind::mahalanobis ? "mahalanobis"
                                                                          : "stress"},
              {"adaptive_iterations", s.neighbors.adaptive_iterations},
              {"floor_fraction", s.neighbors.floor_fraction},
              {"leaf_capacity", s.neighbors.leaf_capacity}};
    if (s.neighbors.stress_tensor) n["stress_tensor"] = mat3_to_json(*s.neighbors.stress_tensor);

    const json doc = {
        {"generator", g},
        {"physics",
         {{"eos", {{"K", s.physics.eos.K}, {"gamma", s.physics.eos.gamma}}},
          {"viscosity",
           {{"alpha", s.physics.viscosity.alpha},
            {"beta", s.physics.viscosity.beta},
            {"epsilon", s.physics.viscosity.epsilon}}},
          {"external_force", vec3_to_json(s.physics.uniform_external_force)}}},
        {"neighbors", n},
        {"run",
         {{"dt", s.run.dt},
          {"steps", s.run.steps},
          {"snapshot_interval", s.run.snapshot_interval},
          {"seed", s.run.seed}}}};
    return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write scenario file '" + path.string() + "'");
    }
    out << scenario_to_json(s);
    if (!out) {
        throw IoError("failed writing scenario file '" + path.string() + "'");
    }
}

namespace {

ParticleTable build_lattice(const LatticeParams& p, std::uint64_t seed, int k_neighbors) {
    const auto [nx, ny, nz] = p.dims;
    std::vector<double> masses;
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    const std::size_t n_real =
        static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    masses.reserve(n_real);
    positions.reserve(n_real);
    velocities.reserve(n_real);

    for (int iz = 0; iz < nz; ++iz) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                positions.push_back(Vec3{ix * p.spacing, iy * p.spacing, iz * p.spacing});
                velocities.push_back(p.velocity);
                masses.push_back(p.mass);
            }
        }
    }
    if (p.velocity_jitter > 0.0) {
        Rng rng(seed);
        for (Vec3& v : velocities) v += p.velocity_jitter * rng.gaussian_vec3();
    }

    std::vector<double> ghost(n_real, 0.0);
    if (p.periodic) {
        // Pad each face with wrapped copies out to one expected kernel support:
        // the radius enclosing k lattice cells, rounded up, plus one cell.
        const double r_cells = std::cbrt(3.0 * k_neighbors / (4.0 * std::numbers::pi));
        const int margin = static_cast<int>(std::ceil(r_cells)) + 1;
        const Vec3 period{nx * p.spacing, ny * p.spacing, nz * p.spacing};
        const double pad = margin * p.spacing;
        const Vec3 lo{-pad, -pad, -pad};
        const Vec3 hi{(nx - 1) * p.spacing + pad, (ny - 1) * p.spacing + pad,
                      (nz - 1) * p.spacing + pad};
        const std::size_t real_count = positions.size();
        for (int sx = -1; sx <= 1; ++sx) {
            for (int sy = -1; sy <= 1; ++sy) {
                for (int sz = -1; sz <= 1; ++sz) {
                    if (sx == 0 && sy == 0 && sz == 0) continue;
                    const Vec3 shift{sx * period.x, sy * period.y, sz * period.z};
                    for (std::size_t i = 0; i < real_count; ++i) {
                        const Vec3 q = positions[i] + shift;
                        if (q.x < lo.x || q.y < lo.y || q.z < lo.z || q.x > hi.x || q.y > hi.y
                            || q.z > hi.z) {
                            continue;
                        }
                        positions.push_back(q);
                        velocities.push_back(velocities[i]);
                        masses.push_back(p.mass);
                        ghost.push_back(1.0);
                    }
                }
            }
        }
    }

    ParticleTable table = ParticleTable::create(std::move(masses), std::move(positions),
                                                std::move(velocities));
    if (p.periodic) table.set_attribute("ghost", std::move(ghost));
    return table;
}

ParticleTable build_cloud(const GaussianCloudParams& p, std::uint64_t seed) {
    const SymEigen3 eig = eigen_sym3(p.covariance);
    if (eig.values[2] < -1e-12 * std::max(1.0, eig.values[0])) {
        fail_field("generator.covariance", "must be positive semidefinite");
    }
    // Symmetric square root maps unit normals to the requested covariance.
    Mat3 root = Mat3::zero();
    for (int i = 0; i < 3; ++i) {
        root += std::sqrt(std::max(eig.values[i], 0.0)) * outer(eig.vectors[i], eig.vectors[i]);
    }
    Rng rng(seed);
    std::vector<double> masses(static_cast<std::size_t>(p.count), p.mass);
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities(static_cast<std::size_t>(p.count), p.velocity);
    positions.reserve(static_cast<std::size_t>(p.count));
    for (int i = 0; i < p.count; ++i) {
        positions.push_back(p.center + root * rng.gaussian_vec3());
    }
    return ParticleTable::create(std::move(masses), std::move(positions), std::move(velocities));
}

ParticleTable build_two_body(const TwoBodyParams& p) {
    const double half = 0.5 * p.separation;
    return ParticleTable::create({p.mass, p.mass}, {Vec3{-half, 0, 0}, Vec3{half, 0, 0}},
                                 {Vec3{0, p.speed, 0}, Vec3{0, -p.speed, 0}});
}

} // namespace

ParticleTable build_initial_table(const Scenario& s) {
    switch (s.generator) {
    case GeneratorKind::lattice:
        return build_lattice(s.lattice, s.run.seed, s.neighbors.k);
    case GeneratorKind::gaussian_cloud:
        return build_cloud(s.cloud, s.run.seed);
    case GeneratorKind::two_body:
        return build_two_body(s.two_body);
    case GeneratorKind::file:
        return read_snapshot(s.file.path).table;
    }
    throw InvalidArgument("unknown generator kind");
}

ForceConfig make_force_config(const ScenarioPhysics& physics) {
    ForceConfig cfg;
    cfg.eos = physics.eos;
    cfg.viscosity = physics.viscosity;
    if (!(physics.uniform_external_force == Vec3{})) {
        const Vec3 g = physics.uniform_external_force;
        cfg.external_force = [g](const Vec3&) { return g; };
    }
    return cfg;
}

} // namespace sphr
