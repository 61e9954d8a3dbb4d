#pragma once

#include "sphr/scenario.hpp"
#include "sphr/sph.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sphr {

struct SnapshotRecord {
    std::size_t index = 0;
    std::uint64_t step = 0;
    double time = 0.0;
    std::string file; ///< relative to the knowledge-base directory
    StepDiagnostics diagnostics;
    double cfl_dt = 0.0; ///< suggested stable step at that state
};

struct RunSummary {
    std::string status = "ok"; ///< "ok" or "failed"
    std::uint64_t failed_step = 0;
    std::string error;
    Vec3 initial_momentum;
    Vec3 final_momentum;
    double momentum_drift_rel = 0.0;
    double min_density = 0.0; ///< over the whole run
    double max_density = 0.0;
    double dt = 0.0;
    double min_cfl_dt = 0.0;
};

/// A run directory: the ordered snapshot sequence plus a manifest carrying the
/// scenario, code version, per-snapshot diagnostics, and the final summary.
class KnowledgeBase {
public:
    /// Prepares a run directory (created if needed) for appending.
    static KnowledgeBase create(const std::filesystem::path& directory, const Scenario& scenario);

    /// Opens an existing run directory by its manifest.
    static KnowledgeBase open(const std::filesystem::path& directory);

    const std::filesystem::path& directory() const noexcept { return directory_; }
    const std::vector<SnapshotRecord>& snapshots() const noexcept { return records_; }
    std::size_t snapshot_count() const noexcept { return records_.size(); }
    const RunSummary& summary() const noexcept { return summary_; }
    const std::string& scenario_json() const noexcept { return scenario_json_; }

    /// Writes the next snapshot file and records it.
    void append_snapshot(const Snapshot& snapshot, const StepDiagnostics& diagnostics,
                         double cfl_dt);

    /// Reads snapshot `index` back; throws InvalidArgument when the index is
    /// beyond the last one.
    Snapshot read(std::size_t index) const;

    /// Writes manifest.json; called once when the run completes or fails.
    void finalize(const RunSummary& summary);

private:
    std::filesystem::path directory_;
    std::string scenario_json_;
    std::vector<SnapshotRecord> records_;
    RunSummary summary_;
};

/// Executes a scenario end to end: builds the initial table, runs the step
/// pipeline, emits snapshots every `snapshot_interval` steps (step 0
/// included), and finalizes the manifest. A numeric failure mid-run is
/// recorded in the manifest with its step index and then rethrown.
KnowledgeBase run_simulation(const Scenario& scenario, const std::filesystem::path& out_dir);

} // namespace sphr
