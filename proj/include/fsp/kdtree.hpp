#pragma once

#include <cstdint>
#include <vector>

#include "fsp/types.hpp"

namespace fsp {

/// Static 3-D k-d tree for exact nearest-neighbor and radius queries.
///
/// Distances are the exact Euclidean metric: a query returns bit-identical
/// values to an exhaustive scan computing (dx*dx + dy*dy + dz*dz) per point,
/// which the foreground thresholding contract depends on.
class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(std::vector<Point3> points);

    struct Nearest {
        std::size_t index = 0;  // index into the original input order
        double distance = 0.0;
    };

    /// Exact nearest neighbor. Throws StateError on an empty tree.
    Nearest nearest(const Point3& query) const;

    /// Indices (original input order, ascending) of all points with
    /// ||p - query|| <= radius. The inclusive boundary matches the DBSCAN
    /// neighborhood definition.
    void radius_indices(const Point3& query, double radius, std::vector<std::size_t>& out) const;

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const std::vector<Point3>& points() const { return points_; }

private:
    struct Node {
        double split = 0.0;
        std::int32_t axis = -1;        // -1 marks a leaf
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t begin = 0;       // leaf range into reordered storage
        std::uint32_t end = 0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void nearest_rec(std::int32_t node, const Point3& q, Nearest& best, double& best_sq) const;
    void radius_rec(std::int32_t node, const Point3& q, double radius_sq,
                    std::vector<std::size_t>& out) const;

    static constexpr std::uint32_t kLeafSize = 16;

    std::vector<Point3> points_;        // original input order
    std::vector<std::uint32_t> order_;  // reordered indices into points_
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

}  // namespace fsp
