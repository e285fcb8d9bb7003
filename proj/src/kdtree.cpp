#include "fsp/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace fsp {

namespace {

inline double axis_value(const Point3& p, int axis) {
    switch (axis) {
        case 0: return p.x;
        case 1: return p.y;
        default: return p.z;
    }
}

}  // namespace

KdTree3::KdTree3(std::vector<Point3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(points_.empty() ? 0 : 2 * points_.size() / kLeafSize + 2);
    if (!points_.empty()) {
        root_ = build(0, static_cast<std::uint32_t>(points_.size()));
    }
}

std::int32_t KdTree3::build(std::uint32_t begin, std::uint32_t end) {
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    // Split on the axis with the largest extent for balanced boxes.
    double lo[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
    double hi[3] = {-std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
    for (std::uint32_t i = begin; i < end; ++i) {
        const Point3& p = points_[order_[i]];
        const double v[3] = {p.x, p.y, p.z};
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], v[a]);
            hi[a] = std::max(hi[a], v[a]);
        }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
        if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    }
    if (!(hi[axis] - lo[axis] > 0.0)) {
        // All points coincide; keep them in one leaf regardless of count.
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return axis_value(points_[a], axis) < axis_value(points_[b], axis);
                     });
    const double split = axis_value(points_[order_[mid]], axis);

    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

KdTree3::Nearest KdTree3::nearest(const Point3& query) const {
    if (points_.empty()) throw StateError("nearest query on an empty KdTree3");
    Nearest best;
    double best_sq = std::numeric_limits<double>::infinity();
    nearest_rec(root_, query, best, best_sq);
    best.distance = std::sqrt(best_sq);
    return best;
}

void KdTree3::nearest_rec(std::int32_t node, const Point3& q, Nearest& best,
                          double& best_sq) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (std::uint32_t i = n.begin; i < n.end; ++i) {
            const std::uint32_t idx = order_[i];
            const double sq = squared_distance(points_[idx], q);
            if (sq < best_sq) {
                best_sq = sq;
                best.index = idx;
            }
        }
        return;
    }
    const double diff = axis_value(q, n.axis) - n.split;
    const std::int32_t near_child = diff < 0.0 ? n.left : n.right;
    const std::int32_t far_child = diff < 0.0 ? n.right : n.left;
    nearest_rec(near_child, q, best, best_sq);
    if (diff * diff < best_sq) {
        nearest_rec(far_child, q, best, best_sq);
    }
}

void KdTree3::radius_indices(const Point3& query, double radius,
                             std::vector<std::size_t>& out) const {
    out.clear();
    if (points_.empty() || radius < 0.0) return;
    radius_rec(root_, query, radius * radius, out);
    std::sort(out.begin(), out.end());
}

void KdTree3::radius_rec(std::int32_t node, const Point3& q, double radius_sq,
                         std::vector<std::size_t>& out) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (std::uint32_t i = n.begin; i < n.end; ++i) {
            const std::uint32_t idx = order_[i];
            if (squared_distance(points_[idx], q) <= radius_sq) {
                out.push_back(idx);
            }
        }
        return;
    }
    const double diff = axis_value(q, n.axis) - n.split;
    const std::int32_t near_child = diff < 0.0 ? n.left : n.right;
    const std::int32_t far_child = diff < 0.0 ? n.right : n.left;
    radius_rec(near_child, q, radius_sq, out);
    // The boundary is inclusive, so visit the far side on exact ties too.
    if (diff * diff <= radius_sq) {
        radius_rec(far_child, q, radius_sq, out);
    }
}

}  // namespace fsp
