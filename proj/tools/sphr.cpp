// Scenario-driven command line for the sphr engine: full runs, neighbor
// queries, density estimates, and knowledge-base inspection.

#include "sphr/errors.hpp"
#include "sphr/neighbors.hpp"
#include "sphr/pipeline.hpp"
#include "sphr/scenario.hpp"
#include "sphr/simulation.hpp"
#include "sphr/snapshot_io.hpp"
#include "sphr/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;
using namespace sphr;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

struct KnnOptions {
    std::string config;
    std::uint32_t id = 0;
    std::optional<int> k;
    std::optional<std::string> metric;
    bool verify_oracle = false;
};

MetricKind parse_metric_name(const std::string& name) {
    if (name == "euclidean") return MetricKind::euclidean;
    if (name == "mahalanobis") return MetricKind::mahalanobis;
    if (name == "stress") return MetricKind::stress;
    throw InvalidArgument("unknown metric '" + name + "'");
}

const char* metric_name(MetricKind kind) {
    switch (kind) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::mahalanobis: return "mahalanobis";
    case MetricKind::stress: return "stress";
    }
    return "?";
}

/// Neighbor structures for one scenario table under one metric kind.
struct NeighborState {
    NeighborRelation relation;
    std::vector<MetricTensor> metrics; ///< one per particle
};

NeighborState build_neighbors(const ParticleTable& table, const NeighborConfig& cfg) {
    switch (cfg.metric) {
    case MetricKind::euclidean: {
        const Octree tree = Octree::build(table, cfg.leaf_capacity);
        return NeighborState{build_relation(tree, table, cfg.k, MetricTensor::euclidean()),
                             std::vector<MetricTensor>(table.size(), MetricTensor::euclidean())};
    }
    case MetricKind::mahalanobis: {
        AdaptiveResult adapted = adaptive_metric_knn(table, cfg.k, cfg.adaptive_iterations,
                                                     cfg.floor_fraction, cfg.leaf_capacity);
        return NeighborState{std::move(adapted.relation), std::move(adapted.metrics)};
    }
    case MetricKind::stress: {
        if (!cfg.stress_tensor) {
            throw InvalidArgument("stress metric needs neighbors.stress_tensor in the scenario");
        }
        const MetricTensor metric =
            invert_spd(*cfg.stress_tensor, cfg.floor_fraction, MetricKind::stress);
        const Octree tree = Octree::build(table, cfg.leaf_capacity);
        return NeighborState{build_relation(tree, table, cfg.k, metric),
                             std::vector<MetricTensor>(table.size(), metric)};
    }
    }
    throw InvalidArgument("unknown metric kind");
}

int cmd_run(const std::string& config, const std::string& out_dir, bool as_json) {
    const Scenario scenario = load_scenario(config);
    const KnowledgeBase kb = run_simulation(scenario, out_dir);
    const RunSummary& sum = kb.summary();
    if (as_json) {
        json doc = {{"out", out_dir},
                    {"snapshots", kb.snapshot_count()},
                    {"status", sum.status},
                    {"momentum_drift_rel", sum.momentum_drift_rel},
                    {"min_density", sum.min_density},
                    {"max_density", sum.max_density},
                    {"dt", sum.dt},
                    {"min_cfl_dt", sum.min_cfl_dt}};
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "run complete: " << kb.snapshot_count() << " snapshots in " << out_dir << "\n"
                  << "  momentum drift (relative): " << sum.momentum_drift_rel << "\n"
                  << "  density range: [" << sum.min_density << ", " << sum.max_density << "]\n"
                  << "  dt = " << sum.dt << ", min CFL estimate = " << sum.min_cfl_dt
                  << (sum.dt > sum.min_cfl_dt ? "  (dt exceeds the CFL estimate)" : "") << "\n";
    }
    return kExitOk;
}

int cmd_knn(const KnnOptions& opt, bool as_json) {
    Scenario scenario = load_scenario(opt.config);
    if (opt.k) scenario.neighbors.k = *opt.k;
    if (opt.metric) scenario.neighbors.metric = parse_metric_name(*opt.metric);

    const ParticleTable table = build_initial_table(scenario);
    if (opt.id >= table.size()) {
        throw InvalidArgument("particle id " + std::to_string(opt.id) + " out of range (n = "
                              + std::to_string(table.size()) + ")");
    }
    const NeighborState state = build_neighbors(table, scenario.neighbors);
    const auto ids = state.relation.neighbors(opt.id);
    const auto xi = state.relation.distances(opt.id);
    const MetricTensor& metric = state.metrics[opt.id];
    const double xi_max = state.relation.xi_max(opt.id);
    const std::optional<Ellipsoid> ellipsoid =
        xi_max > 0.0 ? std::optional<Ellipsoid>(neighbor_ellipsoid(metric, table.positions()[opt.id],
                                                                   xi_max))
                     : std::nullopt;

    std::size_t oracle_mismatches = 0;
    if (opt.verify_oracle) {
        for (std::size_t i = 0; i < table.size(); ++i) {
            const NeighborList expect = brute_force_knn(table, static_cast<ParticleId>(i),
                                                        scenario.neighbors.k, state.metrics[i]);
            const auto got = state.relation.neighbors(static_cast<ParticleId>(i));
            if (!std::equal(expect.ids.begin(), expect.ids.end(), got.begin(), got.end())) {
                ++oracle_mismatches;
            }
        }
    }

    if (as_json) {
        json neighbors = json::array();
        for (std::size_t r = 0; r < ids.size(); ++r) {
            neighbors.push_back({{"rank", r}, {"id", ids[r]}, {"xi", xi[r]}});
        }
        json doc = {{"id", opt.id},
                    {"k", scenario.neighbors.k},
                    {"metric", metric_name(scenario.neighbors.metric)},
                    {"xi_max", xi_max},
                    {"neighbors", neighbors}};
        if (ellipsoid) {
            doc["ellipsoid"] = {{"center", vec3_to_json(ellipsoid->center)},
                                {"semi_axes", ellipsoid->semi_axes},
                                {"axes",
                                 {vec3_to_json(ellipsoid->axes[0]), vec3_to_json(ellipsoid->axes[1]),
                                  vec3_to_json(ellipsoid->axes[2])}}};
        }
        if (opt.verify_oracle) {
            doc["oracle"] = {{"queries", table.size()}, {"mismatches", oracle_mismatches}};
        }
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "neighbors of particle " << opt.id << " (k = " << scenario.neighbors.k
                  << ", metric = " << metric_name(scenario.neighbors.metric) << ")\n";
        std::printf("%6s %10s %16s %16s\n", "rank", "id", "xi", "sqrt(xi)");
        for (std::size_t r = 0; r < ids.size(); ++r) {
            std::printf("%6zu %10u %16.9g %16.9g\n", r, ids[r], xi[r], std::sqrt(xi[r]));
        }
        if (ellipsoid) {
            std::cout << "bounding ellipsoid (xi_max = " << xi_max << "):\n";
            for (int a = 0; a < 3; ++a) {
                std::printf("  semi-axis %d: %.9g along (%.9g, %.9g, %.9g)\n", a,
                            ellipsoid->semi_axes[a], ellipsoid->axes[a].x, ellipsoid->axes[a].y,
                            ellipsoid->axes[a].z);
            }
        } else {
            std::cout << "bounding ellipsoid: degenerate (xi_max = 0)\n";
        }
        if (opt.verify_oracle) {
            std::cout << "oracle check: " << (table.size() - oracle_mismatches) << "/"
                      << table.size() << " queries match the brute-force scan\n";
        }
    }
    if (opt.verify_oracle && oracle_mismatches > 0) {
        std::cerr << "error: octree k-NN disagrees with the brute-force oracle\n";
        return kExitNumeric;
    }
    return kExitOk;
}

int cmd_density(const std::string& config, const std::string& out_csv, bool as_json) {
    const Scenario scenario = load_scenario(config);
    ParticleTable table = build_initial_table(scenario);
    const NeighborState state = build_neighbors(table, scenario.neighbors);
    const EffectiveNeighbors effective = symmetric_closure(state.relation);
    const std::vector<KernelSpec> specs = particle_specs(table, state.relation, state.metrics);
    const PairTerms terms = build_pair_terms(table, effective, specs);
    const std::vector<double> rho = compute_density(table, terms);

    std::ofstream out(out_csv, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write CSV file '" + out_csv + "'");
    }
    const bool has_ghost = table.has_attribute("ghost");
    out << "id,x,y,z,rho" << (has_ghost ? ",ghost" : "") << "\n";
    double min_rho = rho.empty() ? 0.0 : rho[0];
    double max_rho = min_rho;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const Vec3& p = table.positions()[i];
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g", i, p.x, p.y, p.z, rho[i]);
        out << buf;
        if (has_ghost) out << ',' << (table.attribute("ghost")[i] != 0.0 ? 1 : 0);
        out << '\n';
        min_rho = std::min(min_rho, rho[i]);
        max_rho = std::max(max_rho, rho[i]);
    }
    if (!out) {
        throw IoError("failed writing CSV file '" + out_csv + "'");
    }
    if (as_json) {
        json doc = {{"out", out_csv},
                    {"n", table.size()},
                    {"min_density", min_rho},
                    {"max_density", max_rho}};
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "wrote " << table.size() << " densities to " << out_csv << " (range ["
                  << min_rho << ", " << max_rho << "])\n";
    }
    return kExitOk;
}

int cmd_inspect(const std::string& kb_dir, std::size_t index, const std::string& out_csv,
                bool as_json) {
    const KnowledgeBase kb = KnowledgeBase::open(kb_dir);
    const Snapshot snapshot = kb.read(index);
    if (as_json) {
        json doc = {{"index", index},
                    {"step", snapshot.step},
                    {"time", snapshot.time},
                    {"n", snapshot.table.size()},
                    {"attributes", snapshot.table.attribute_names()}};
        std::cout << doc.dump(2) << '\n';
        if (!out_csv.empty()) write_snapshot_csv(out_csv, snapshot);
    } else if (out_csv.empty()) {
        write_snapshot_csv(std::cout, snapshot);
    } else {
        write_snapshot_csv(out_csv, snapshot);
        std::cout << "wrote snapshot " << index << " (step " << snapshot.step << ", t = "
                  << snapshot.time << ") to " << out_csv << '\n';
    }
    return kExitOk;
}

int report_error(const std::string& kind, const std::string& message, int code, bool as_json) {
    if (as_json) {
        const json doc = {{"error", {{"type", kind}, {"message", message}, {"exit_code", code}}}};
        std::cout << doc.dump(2) << '\n';
    }
    std::cerr << "error: " << message << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic-neighbor SPH engine"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output");

    auto* run = app.add_subcommand("run", "execute a scenario and write a knowledge base");
    std::string run_config, run_out;
    run->add_option("--config", run_config, "scenario file")->required();
    run->add_option("--out", run_out, "output run directory")->required();

    auto* knn = app.add_subcommand("knn", "query the k nearest neighbors of one particle");
    KnnOptions knn_opt;
    knn->add_option("--config", knn_opt.config, "scenario file")->required();
    knn->add_option("--id", knn_opt.id, "particle id")->required();
    int knn_k = 0;
    std::string knn_metric;
    knn->add_option("--k", knn_k, "override neighbor count");
    knn->add_option("--metric", knn_metric, "override metric kind")
        ->check(CLI::IsMember({"euclidean", "mahalanobis", "stress"}));
    knn->add_flag("--verify-oracle", knn_opt.verify_oracle,
                  "compare every query against the brute-force scan");

    auto* density = app.add_subcommand("density", "estimate densities for a scenario");
    std::string density_config, density_out;
    density->add_option("--config", density_config, "scenario file")->required();
    density->add_option("--out", density_out, "output CSV file")->required();

    auto* inspect = app.add_subcommand("inspect", "dump a stored snapshot as CSV");
    std::string inspect_kb, inspect_out;
    std::size_t inspect_index = 0;
    inspect->add_option("--kb", inspect_kb, "knowledge-base directory")->required();
    inspect->add_option("--snapshot", inspect_index, "snapshot index")->required();
    inspect->add_option("--out", inspect_out, "output CSV file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version land here with success; everything else is a
        // usage error and must exit 1.
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(run_config, run_out, as_json);
        if (app.got_subcommand(knn)) {
            if (knn->count("--k") > 0) knn_opt.k = knn_k;
            if (knn->count("--metric") > 0) knn_opt.metric = knn_metric;
            return cmd_knn(knn_opt, as_json);
        }
        if (app.got_subcommand(density)) return cmd_density(density_config, density_out, as_json);
        if (app.got_subcommand(inspect)) {
            return cmd_inspect(inspect_kb, inspect_index, inspect_out, as_json);
        }
    } catch (const InvalidArgument& e) {
        return report_error("invalid_argument", e.what(), kExitUsage, as_json);
    } catch (const NumericError& e) {
        return report_error("numeric_error", e.what(), kExitNumeric, as_json);
    } catch (const IoError& e) {
        return report_error("io_error", e.what(), kExitIo, as_json);
    } catch (const std::exception& e) {
        return report_error("internal_error", e.what(), kExitNumeric, as_json);
    }
    return kExitUsage;
}
