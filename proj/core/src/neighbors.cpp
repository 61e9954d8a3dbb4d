#include "sphr/neighbors.hpp"

#include "sphr/errors.hpp"
#include "sphr/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <utility>

namespace sphr {

bool EffectiveNeighbors::contains(ParticleId i, ParticleId j) const {
    const auto row = of(i);
    return std::binary_search(row.begin(), row.end(), j);
}

namespace {

using Candidate = std::pair<double, ParticleId>; // (xi, id), worst = lexicographic max

void validate_query(std::size_t n, ParticleId i, int k) {
    if (i >= n) {
        throw InvalidArgument("particle id " + std::to_string(i) + " out of range (n = "
                              + std::to_string(n) + ")");
    }
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw InvalidArgument("k must lie in [1, n]; got k = " + std::to_string(k) + ", n = "
                              + std::to_string(n));
    }
}

class KnnSearch {
public:
    KnnSearch(const Octree& tree, ParticleId query_id, const Vec3& query, std::size_t budget,
              const Mat3& form, double lambda_min)
        : tree_(tree), query_id_(query_id), query_(query), budget_(budget), form_(form),
          // Shaved a hair so eigensolver roundoff can only loosen the prune,
          // never cut a cell holding an exact-tie candidate. The identity
          // bound is already rigorous and stays exact.
          lambda_min_(lambda_min == 1.0 ? 1.0 : lambda_min * (1.0 - 1e-12)) {}

    void run() {
        if (budget_ == 0) return;
        visit(0);
    }

    /// Ascending (xi, id).
    std::vector<Candidate> sorted_result() {
        std::vector<Candidate> out;
        out.reserve(heap_.size());
        while (!heap_.empty()) {
            out.push_back(heap_.top());
            heap_.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    void visit(std::size_t node_index) {
        const Octree::Node& node = tree_.nodes()[node_index];
        if (node.count == 0) return;
        // A cell may be skipped only when even its best possible squared
        // distance, bounded below through the smallest form eigenvalue,
        // exceeds the current k-th best.
        if (heap_.size() == budget_ && lambda_min_ * box_distance2(node, query_) > heap_.top().first) {
            return;
        }
        if (node.is_leaf()) {
            scan_leaf(node);
            return;
        }
        std::array<std::pair<double, int>, 8> order;
        for (int o = 0; o < 8; ++o) {
            order[o] = {box_distance2(tree_.nodes()[node.first_child + o], query_), o};
        }
        std::sort(order.begin(), order.end());
        for (const auto& [bound, o] : order) {
            if (heap_.size() == budget_ && lambda_min_ * bound > heap_.top().first) break;
            visit(static_cast<std::size_t>(node.first_child + o));
        }
    }

    void scan_leaf(const Octree::Node& node) {
        const auto ids = tree_.ids();
        const auto points = tree_.points();
        for (std::uint32_t s = node.begin; s < node.begin + node.count; ++s) {
            const ParticleId j = ids[s];
            if (j == query_id_) continue;
            const double xi = quad_form(form_, query_ - points[j]);
            const Candidate cand{xi, j};
            if (heap_.size() < budget_) {
                heap_.push(cand);
            } else if (cand < heap_.top()) {
                heap_.pop();
                heap_.push(cand);
            }
        }
    }

    const Octree& tree_;
    ParticleId query_id_;
    Vec3 query_;
    std::size_t budget_;
    const Mat3& form_;
    double lambda_min_;
    std::priority_queue<Candidate> heap_;
};

NeighborList knn_into(const Octree& tree, ParticleId i, int k, const MetricTensor& m) {
    KnnSearch search(tree, i, tree.points()[i], static_cast<std::size_t>(k) - 1, m.form(),
                     m.min_eigenvalue());
    search.run();
    const std::vector<Candidate> found = search.sorted_result();

    NeighborList list;
    list.ids.reserve(static_cast<std::size_t>(k));
    list.xi.reserve(static_cast<std::size_t>(k));
    list.ids.push_back(i); // the improper neighbor counts toward k at rank 0
    list.xi.push_back(0.0);
    for (const auto& [xi, id] : found) {
        list.ids.push_back(id);
        list.xi.push_back(xi);
    }
    return list;
}

} // namespace

NeighborList knn_query(const Octree& tree, const ParticleTable& table, ParticleId i, int k,
                       const MetricTensor& m) {
    if (tree.size() != table.size()) {
        throw InvalidArgument("octree was built over " + std::to_string(tree.size())
                              + " particles, table has " + std::to_string(table.size()));
    }
    validate_query(table.size(), i, k);
    return knn_into(tree, i, k, m);
}

NeighborRelation build_relation(const Octree& tree, const ParticleTable& table, int k,
                                const MetricTensor& m) {
    validate_query(table.size(), 0, k);
    NeighborRelation relation(k, table.size());
    parallel_for(table.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const NeighborList list = knn_into(tree, static_cast<ParticleId>(i), k, m);
            std::copy(list.ids.begin(), list.ids.end(), relation.row_ids(static_cast<ParticleId>(i)).begin());
            std::copy(list.xi.begin(), list.xi.end(), relation.row_xi(static_cast<ParticleId>(i)).begin());
        }
    });
    return relation;
}

NeighborRelation build_relation(const Octree& tree, const ParticleTable& table, int k,
                                std::span<const MetricTensor> metrics) {
    validate_query(table.size(), 0, k);
    if (metrics.size() != table.size()) {
        throw InvalidArgument("need one metric per particle: got " + std::to_string(metrics.size())
                              + " for n = " + std::to_string(table.size()));
    }
    NeighborRelation relation(k, table.size());
    parallel_for(table.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const NeighborList list = knn_into(tree, static_cast<ParticleId>(i), k, metrics[i]);
            std::copy(list.ids.begin(), list.ids.end(), relation.row_ids(static_cast<ParticleId>(i)).begin());
            std::copy(list.xi.begin(), list.xi.end(), relation.row_xi(static_cast<ParticleId>(i)).begin());
        }
    });
    return relation;
}

EffectiveNeighbors symmetric_closure(const NeighborRelation& relation) {
    const std::size_t n = relation.size();
    std::vector<std::vector<ParticleId>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto neigh = relation.neighbors(static_cast<ParticleId>(i));
        rows[i].assign(neigh.begin(), neigh.end());
    }
    // Union with the transpose: j gains i for every pair (i, j).
    for (std::size_t i = 0; i < n; ++i) {
        for (const ParticleId j : relation.neighbors(static_cast<ParticleId>(i))) {
            if (j != i) rows[j].push_back(static_cast<ParticleId>(i));
        }
    }
    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = rows[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        offsets[i + 1] = offsets[i] + row.size();
    }
    std::vector<ParticleId> ids;
    ids.reserve(offsets[n]);
    for (const auto& row : rows) ids.insert(ids.end(), row.begin(), row.end());
    return EffectiveNeighbors(std::move(offsets), std::move(ids));
}

AdaptiveResult adaptive_metric_knn(const ParticleTable& table, int k, int iterations,
                                   double floor_fraction, std::uint32_t leaf_capacity) {
    if (iterations < 0) {
        throw InvalidArgument("iterations must be >= 0, got " + std::to_string(iterations));
    }
    validate_query(table.size(), 0, k);

    // One Euclidean octree serves every metric; anisotropy only tightens or
    // loosens the query bound, never the geometry being indexed.
    const Octree tree = Octree::build(table, leaf_capacity);
    const std::size_t n = table.size();
    const auto positions = table.positions();

    std::vector<MetricTensor> metrics(n, MetricTensor::euclidean());
    NeighborRelation relation = build_relation(tree, table, k, MetricTensor::euclidean());

    for (int iter = 0; iter < iterations; ++iter) {
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            std::vector<Vec3> neigh;
            neigh.reserve(static_cast<std::size_t>(k));
            for (std::size_t i = begin; i < end; ++i) {
                neigh.clear();
                for (const ParticleId j : relation.neighbors(static_cast<ParticleId>(i))) {
                    if (j != i) neigh.push_back(positions[j]);
                }
                if (neigh.empty()) {
                    metrics[i] = MetricTensor::euclidean(); // k = 1: nothing to adapt to
                    continue;
                }
                const Mat3 sigma = estimate_covariance(positions[i], neigh);
                metrics[i] = det_normalized(invert_spd(sigma, floor_fraction));
            }
        });
        relation = build_relation(tree, table, k, metrics);
    }
    return AdaptiveResult{std::move(metrics), std::move(relation)};
}

NeighborList brute_force_knn(const ParticleTable& table, ParticleId i, int k,
                             const MetricTensor& m) {
    validate_query(table.size(), i, k);
    const auto positions = table.positions();
    std::vector<Candidate> all;
    all.reserve(table.size() - 1);
    for (std::size_t j = 0; j < table.size(); ++j) {
        if (j == i) continue;
        all.emplace_back(quad_form(m.form(), positions[i] - positions[j]),
                         static_cast<ParticleId>(j));
    }
    std::sort(all.begin(), all.end());
    NeighborList list;
    list.ids.push_back(i);
    list.xi.push_back(0.0);
    for (int r = 0; r + 1 < k; ++r) {
        list.ids.push_back(all[r].second);
        list.xi.push_back(all[r].first);
    }
    return list;
}

} // namespace sphr
