#pragma once

#include "sphr/math.hpp"
#include "sphr/particles.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sphr {

/// Hierarchical spatial tessellation of the particle positions into cubic
/// cells: every internal cell has 8 children (one per octant, empty children
/// allowed), every particle id lives in exactly one leaf.
///
/// Built once per configuration and immutable afterwards; it snapshots the
/// positions it indexes, so later mutation of the source table does not
/// invalidate queries against the tree.
class Octree {
public:
    struct Node {
        Vec3 center;
        double half = 0.0;             ///< half edge length of the cubic cell
        Vec3 lo;                       ///< tight bounds of the contained positions
        Vec3 hi;
        std::int32_t first_child = -1; ///< index of child octant 0, -1 for leaves
        std::uint32_t begin = 0;       ///< first id slot (leaves)
        std::uint32_t count = 0;       ///< ids in the subtree

        bool is_leaf() const noexcept { return first_child < 0; }
    };

    /// Root box is the tight bounding cube of all positions expanded by a 1e-6
    /// relative margin. Leaves hold at most `leaf_capacity` ids except where
    /// coincident positions make splitting pointless; those leaves overflow.
    static Octree build(const ParticleTable& table, std::uint32_t leaf_capacity = 16);

    std::size_t size() const noexcept { return points_.size(); }
    std::uint32_t leaf_capacity() const noexcept { return leaf_capacity_; }

    std::span<const Node> nodes() const noexcept { return nodes_; }
    const Node& root() const noexcept { return nodes_.front(); }

    /// Particle ids in leaf storage order; a leaf's ids are
    /// ids()[node.begin .. node.begin + node.count).
    std::span<const std::uint32_t> ids() const noexcept { return ids_; }

    /// The positions the tree was built over, indexed by particle id.
    std::span<const Vec3> points() const noexcept { return points_; }

private:
    void build_node(std::size_t node_index, std::uint32_t begin, std::uint32_t end, int depth);
    void set_tight_bounds(Node& node, std::uint32_t begin, std::uint32_t end);

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> ids_;
    std::vector<Vec3> points_;
    std::uint32_t leaf_capacity_ = 16;
};

/// Squared Euclidean distance from a point to a node's tight content box;
/// zero when the point is inside. Uses one correctly-rounded subtraction per
/// axis and the same accumulation order as the distance evaluation, so the
/// result never exceeds the computed squared distance to any contained point
/// (exact ties survive pruning).
double box_distance2(const Octree::Node& node, const Vec3& p);

} // namespace sphr
