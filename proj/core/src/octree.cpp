#include "sphr/octree.hpp"

#include "sphr/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace sphr {

namespace {

constexpr int kMaxDepth = 64;

int octant_of(const Vec3& p, const Vec3& center) {
    return (p.x >= center.x ? 1 : 0) | (p.y >= center.y ? 2 : 0) | (p.z >= center.z ? 4 : 0);
}

Vec3 child_center(const Vec3& center, double quarter, int octant) {
    return {center.x + ((octant & 1) ? quarter : -quarter),
            center.y + ((octant & 2) ? quarter : -quarter),
            center.z + ((octant & 4) ? quarter : -quarter)};
}

} // namespace

Octree Octree::build(const ParticleTable& table, std::uint32_t leaf_capacity) {
    if (table.size() == 0) {
        throw InvalidArgument("cannot build an octree over an empty table");
    }
    if (leaf_capacity < 1) {
        throw InvalidArgument("leaf_capacity must be at least 1");
    }

    Octree tree;
    tree.leaf_capacity_ = leaf_capacity;
    tree.points_.assign(table.positions().begin(), table.positions().end());
    tree.ids_.resize(tree.points_.size());
    std::iota(tree.ids_.begin(), tree.ids_.end(), 0u);

    Vec3 lo = tree.points_.front();
    Vec3 hi = tree.points_.front();
    for (const Vec3& p : tree.points_) {
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }
    const Vec3 center = 0.5 * (lo + hi);
    double half = 0.0;
    for (int a = 0; a < 3; ++a) half = std::max(half, 0.5 * (hi[a] - lo[a]));
    half *= 1.0 + 1e-6;

    tree.nodes_.reserve(2 * tree.points_.size() / std::max<std::uint32_t>(leaf_capacity, 1) + 16);
    Node root;
    root.center = center;
    root.half = half;
    root.begin = 0;
    root.count = static_cast<std::uint32_t>(tree.ids_.size());
    tree.nodes_.push_back(root);
    tree.build_node(0, 0, static_cast<std::uint32_t>(tree.ids_.size()), 0);
    return tree;
}

void Octree::set_tight_bounds(Node& node, std::uint32_t begin, std::uint32_t end) {
    if (begin == end) {
        node.lo = Vec3{};
        node.hi = Vec3{};
        return;
    }
    Vec3 lo = points_[ids_[begin]];
    Vec3 hi = lo;
    for (std::uint32_t s = begin + 1; s < end; ++s) {
        const Vec3& p = points_[ids_[s]];
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }
    node.lo = lo;
    node.hi = hi;
}

void Octree::build_node(std::size_t node_index, std::uint32_t begin, std::uint32_t end, int depth) {
    set_tight_bounds(nodes_[node_index], begin, end);
    const std::uint32_t count = end - begin;
    if (count <= leaf_capacity_ || depth >= kMaxDepth) return;

    // Coincident positions cannot be separated by splitting; leave the leaf overfull.
    const Vec3 first = points_[ids_[begin]];
    bool all_same = true;
    for (std::uint32_t s = begin + 1; s < end && all_same; ++s) {
        all_same = points_[ids_[s]] == first;
    }
    if (all_same) return;

    const Vec3 center = nodes_[node_index].center;
    const double quarter = 0.5 * nodes_[node_index].half;

    // Counting sort by octant, stable so the layout is deterministic.
    std::array<std::uint32_t, 8> counts{};
    for (std::uint32_t s = begin; s < end; ++s) {
        counts[octant_of(points_[ids_[s]], center)]++;
    }
    std::array<std::uint32_t, 8> offsets{};
    std::uint32_t running = begin;
    for (int o = 0; o < 8; ++o) {
        offsets[o] = running;
        running += counts[o];
    }
    std::array<std::uint32_t, 8> cursor = offsets;
    std::vector<std::uint32_t> scratch(ids_.begin() + begin, ids_.begin() + end);
    for (const std::uint32_t id : scratch) {
        ids_[cursor[octant_of(points_[id], center)]++] = id;
    }

    const auto first_child = static_cast<std::int32_t>(nodes_.size());
    nodes_[node_index].first_child = first_child;
    for (int o = 0; o < 8; ++o) {
        Node child;
        child.center = child_center(center, quarter, o);
        child.half = quarter;
        child.begin = offsets[o];
        child.count = counts[o];
        nodes_.push_back(child);
    }
    for (int o = 0; o < 8; ++o) {
        if (counts[o] > 0) {
            build_node(static_cast<std::size_t>(first_child + o), offsets[o], offsets[o] + counts[o],
                       depth + 1);
        } else {
            set_tight_bounds(nodes_[static_cast<std::size_t>(first_child + o)], offsets[o],
                             offsets[o]);
        }
    }
}

double box_distance2(const Octree::Node& node, const Vec3& p) {
    // Per-axis gap via single subtractions: monotone rounding keeps the gap
    // at or below |p_a - x_a| for every contained x. Accumulation mirrors
    // dot(d, d): ((gx*gx + gy*gy) + gz*gz).
    const double gx = std::max({node.lo.x - p.x, p.x - node.hi.x, 0.0});
    const double gy = std::max({node.lo.y - p.y, p.y - node.hi.y, 0.0});
    const double gz = std::max({node.lo.z - p.z, p.z - node.hi.z, 0.0});
    return gx * gx + gy * gy + gz * gz;
}

} // namespace sphr
