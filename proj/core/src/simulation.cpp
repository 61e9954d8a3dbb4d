#include "sphr/simulation.hpp"

#include "sphr/errors.hpp"
#include "sphr/snapshot_io.hpp"
#include "sphr/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace sphr {

using nlohmann::json;

namespace {

std::string snapshot_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snapshot_%06zu.sphr", index);
    return buf;
}

// Diagnostics of a failing run can legitimately hold non-finite values, which
// plain JSON cannot carry; encode those as strings.
json num_to_json(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double num_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    throw IoError("manifest field is not a number");
}

json vec3_to_json(const Vec3& v) {
    return json::array({num_to_json(v.x), num_to_json(v.y), num_to_json(v.z)});
}

Vec3 vec3_from_json(const json& v) {
    return Vec3{num_from_json(v.at(0)), num_from_json(v.at(1)), num_from_json(v.at(2))};
}

double momentum_scale(const ParticleTable& table) {
    double scale = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        scale += table.masses()[i] * norm(table.velocities()[i]);
    }
    return scale;
}

} // namespace

KnowledgeBase KnowledgeBase::create(const std::filesystem::path& directory,
                                    const Scenario& scenario) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw IoError("cannot create run directory '" + directory.string() + "': " + ec.message());
    }
    if (std::filesystem::exists(directory / "manifest.json")) {
        throw IoError("run directory '" + directory.string()
                      + "' already holds a manifest; refusing to overwrite");
    }
    KnowledgeBase kb;
    kb.directory_ = directory;
    kb.scenario_json_ = scenario_to_json(scenario);
    return kb;
}

KnowledgeBase KnowledgeBase::open(const std::filesystem::path& directory) {
    const std::filesystem::path manifest_path = directory / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open manifest '" + manifest_path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("corrupt manifest '" + manifest_path.string() + "': " + e.what());
    }

    KnowledgeBase kb;
    kb.directory_ = directory;
    try {
        kb.scenario_json_ = doc.at("scenario").dump(2) + "\n";
        for (const json& s : doc.at("snapshots")) {
            SnapshotRecord rec;
            rec.index = s.at("index").get<std::size_t>();
            rec.step = s.at("step").get<std::uint64_t>();
            rec.time = s.at("time").get<double>();
            rec.file = s.at("file").get<std::string>();
            rec.diagnostics.total_momentum = vec3_from_json(s.at("momentum"));
            rec.diagnostics.kinetic_energy = num_from_json(s.at("kinetic_energy"));
            rec.diagnostics.min_density = num_from_json(s.at("min_density"));
            rec.diagnostics.max_density = num_from_json(s.at("max_density"));
            rec.cfl_dt = num_from_json(s.at("cfl_dt"));
            kb.records_.push_back(std::move(rec));
        }
        const json& sum = doc.at("summary");
        kb.summary_.status = sum.at("status").get<std::string>();
        kb.summary_.initial_momentum = vec3_from_json(sum.at("initial_momentum"));
        kb.summary_.final_momentum = vec3_from_json(sum.at("final_momentum"));
        kb.summary_.momentum_drift_rel = num_from_json(sum.at("momentum_drift_rel"));
        kb.summary_.min_density = num_from_json(sum.at("min_density"));
        kb.summary_.max_density = num_from_json(sum.at("max_density"));
        kb.summary_.dt = num_from_json(sum.at("dt"));
        kb.summary_.min_cfl_dt = num_from_json(sum.at("min_cfl_dt"));
        if (sum.contains("failed_step")) {
            kb.summary_.failed_step = sum.at("failed_step").get<std::uint64_t>();
        }
        if (sum.contains("error")) kb.summary_.error = sum.at("error").get<std::string>();
    } catch (const json::exception& e) {
        throw IoError("manifest '" + manifest_path.string() + "' is missing fields: " + e.what());
    }
    return kb;
}

void KnowledgeBase::append_snapshot(const Snapshot& snapshot, const StepDiagnostics& diagnostics,
                                    double cfl_dt) {
    if (!records_.empty()
        && (snapshot.step <= records_.back().step || snapshot.time <= records_.back().time)) {
        throw InvalidArgument("snapshots must arrive with strictly increasing (step, time); got step "
                              + std::to_string(snapshot.step) + " after "
                              + std::to_string(records_.back().step));
    }
    SnapshotRecord rec;
    rec.index = records_.size();
    rec.step = snapshot.step;
    rec.time = snapshot.time;
    rec.file = snapshot_filename(rec.index);
    rec.diagnostics = diagnostics;
    rec.cfl_dt = cfl_dt;
    write_snapshot(directory_ / rec.file, snapshot);
    records_.push_back(std::move(rec));
}

Snapshot KnowledgeBase::read(std::size_t index) const {
    if (index >= records_.size()) {
        throw InvalidArgument("snapshot index " + std::to_string(index)
                              + " beyond the last one (count = " + std::to_string(records_.size())
                              + ")");
    }
    return read_snapshot(directory_ / records_[index].file);
}

void KnowledgeBase::finalize(const RunSummary& summary) {
    summary_ = summary;

    json snapshots = json::array();
    for (const SnapshotRecord& rec : records_) {
        snapshots.push_back({{"index", rec.index},
                             {"step", rec.step},
                             {"time", rec.time},
                             {"file", rec.file},
                             {"momentum", vec3_to_json(rec.diagnostics.total_momentum)},
                             {"kinetic_energy", num_to_json(rec.diagnostics.kinetic_energy)},
                             {"min_density", num_to_json(rec.diagnostics.min_density)},
                             {"max_density", num_to_json(rec.diagnostics.max_density)},
                             {"cfl_dt", num_to_json(rec.cfl_dt)}});
    }
    json sum = {{"status", summary_.status},
                {"initial_momentum", vec3_to_json(summary_.initial_momentum)},
                {"final_momentum", vec3_to_json(summary_.final_momentum)},
                {"momentum_drift_rel", num_to_json(summary_.momentum_drift_rel)},
                {"min_density", num_to_json(summary_.min_density)},
                {"max_density", num_to_json(summary_.max_density)},
                {"dt", num_to_json(summary_.dt)},
                {"min_cfl_dt", num_to_json(summary_.min_cfl_dt)}};
    if (summary_.status != "ok") {
        sum["failed_step"] = summary_.failed_step;
        sum["error"] = summary_.error;
    }

    const json doc = {{"format", "sphr-knowledge-base"},
                      {"version", std::string(kVersion)},
                      {"scenario", json::parse(scenario_json_)},
                      {"snapshots", snapshots},
                      {"summary", sum}};

    const std::filesystem::path manifest_path = directory_ / "manifest.json";
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write manifest '" + manifest_path.string() + "'");
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing manifest '" + manifest_path.string() + "'");
    }
}

KnowledgeBase run_simulation(const Scenario& scenario, const std::filesystem::path& out_dir) {
    ParticleTable table = build_initial_table(scenario);
    SphPipeline pipeline(scenario.neighbors, make_force_config(scenario.physics));
    KnowledgeBase kb = KnowledgeBase::create(out_dir, scenario);

    LeapfrogStepper stepper(table, std::ref(pipeline));
    RunSummary summary;
    summary.dt = scenario.run.dt;

    std::uint64_t current_step = 0;
    try {
        stepper.prime();
        StepDiagnostics diag = measure(table);
        summary.initial_momentum = diag.total_momentum;
        summary.min_density = diag.min_density;
        summary.max_density = diag.max_density;
        summary.min_cfl_dt = pipeline.cfl_timestep();
        const double scale_initial = momentum_scale(table);
        kb.append_snapshot(Snapshot{0.0, 0, table}, diag, pipeline.cfl_timestep());

        for (std::uint64_t s = 1; s <= scenario.run.steps; ++s) {
            current_step = s;
            diag = stepper.advance(scenario.run.dt);
            summary.min_density = std::min(summary.min_density, diag.min_density);
            summary.max_density = std::max(summary.max_density, diag.max_density);
            summary.min_cfl_dt = std::min(summary.min_cfl_dt, pipeline.cfl_timestep());
            if (s % scenario.run.snapshot_interval == 0) {
                kb.append_snapshot(Snapshot{stepper.time(), s, table}, diag,
                                   pipeline.cfl_timestep());
            }
        }

        summary.final_momentum = diag.total_momentum;
        const double scale = std::max({scale_initial, momentum_scale(table), 1e-300});
        summary.momentum_drift_rel = norm(diag.total_momentum - summary.initial_momentum) / scale;
        kb.finalize(summary);
    } catch (const NumericError& e) {
        summary.status = "failed";
        summary.failed_step = current_step;
        summary.error = e.what();
        kb.finalize(summary);
        throw;
    }
    return kb;
}

} // namespace sphr
