#include "fsp/cloud_ops.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace fsp {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

struct VoxelKey {
    std::int64_t kx, ky, kz;
    bool operator==(const VoxelKey& o) const { return kx == o.kx && ky == o.ky && kz == o.kz; }
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t v : {static_cast<std::uint64_t>(k.kx), static_cast<std::uint64_t>(k.ky),
                                static_cast<std::uint64_t>(k.kz)}) {
            h ^= v;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

struct VoxelAccum {
    double sx = 0, sy = 0, sz = 0;
    std::size_t count = 0;
};

// Orientation of c relative to segment a->b (cross product z-component).
double cross2(const std::array<double, 2>& a, const std::array<double, 2>& b,
              const std::array<double, 2>& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

bool on_segment_collinear(const std::array<double, 2>& a, const std::array<double, 2>& b,
                          const std::array<double, 2>& p) {
    return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
           std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
}

// Proper or improper intersection of segments [a,b] and [c,d].
bool segments_intersect(const std::array<double, 2>& a, const std::array<double, 2>& b,
                        const std::array<double, 2>& c, const std::array<double, 2>& d) {
    const double d1 = cross2(c, d, a);
    const double d2 = cross2(c, d, b);
    const double d3 = cross2(a, b, c);
    const double d4 = cross2(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    if (d1 == 0 && on_segment_collinear(c, d, a)) return true;
    if (d2 == 0 && on_segment_collinear(c, d, b)) return true;
    if (d3 == 0 && on_segment_collinear(a, b, c)) return true;
    if (d4 == 0 && on_segment_collinear(a, b, d)) return true;
    return false;
}

}  // namespace

bool is_rotation_matrix(const RotationMatrix3& R, double tol) {
    const Eigen::Matrix3d err = R.transpose() * R - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(R.determinant() - 1.0) <= tol;
}

RotationMatrix3 build_rotation(const TiltAngles& angles) {
    // kHalfPi is the double below the real pi/2, so <= keeps the interval open
    // in exact arithmetic while admitting the representable quarter turn.
    if (!(std::abs(angles.roll_phi) <= kHalfPi) || !(std::abs(angles.pitch_theta) <= kHalfPi)) {
        throw InvalidParameterError("tilt angles must lie in (-pi/2, pi/2)");
    }
    const double cp = std::cos(angles.roll_phi), sp = std::sin(angles.roll_phi);
    const double ct = std::cos(angles.pitch_theta), st = std::sin(angles.pitch_theta);

    RotationMatrix3 rx;
    rx << 1, 0, 0,
          0, cp, -sp,
          0, sp, cp;
    RotationMatrix3 ry;
    ry << ct, 0, st,
          0, 1, 0,
          -st, 0, ct;
    return ry * rx;  // pitch first, then roll
}

PointCloudFrame correct_frame(const PointCloudFrame& frame, const RotationMatrix3& R) {
    if (frame.tag != FrameTag::SensorFrame) {
        throw StateError("correct_frame expects a SensorFrame cloud");
    }
    const Eigen::Matrix3d rt = R.transpose();
    PointCloudFrame out;
    out.frame_id = frame.frame_id;
    out.timestamp = frame.timestamp;
    out.tag = FrameTag::LeveledFrame;
    out.points.reserve(frame.points.size());
    for (const Point3& p : frame.points) {
        const Eigen::Vector3d v = rt * Eigen::Vector3d(p.x, p.y, p.z);
        out.points.push_back({v.x(), v.y(), v.z()});
    }
    return out;
}

void validate_roi(const RegionOfInterest& roi) {
    const auto& poly = roi.polygon_xy;
    if (poly.size() < 3) {
        throw InvalidParameterError("ROI polygon needs at least 3 vertices");
    }
    if (!(roi.z_min < roi.z_max)) {
        throw InvalidParameterError("ROI requires z_min < z_max");
    }
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        if (a[0] == b[0] && a[1] == b[1]) {
            throw InvalidParameterError("ROI polygon has a zero-length edge");
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip edges sharing a vertex with edge i.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const auto& c = poly[j];
            const auto& d = poly[(j + 1) % n];
            if (segments_intersect(a, b, c, d)) {
                throw InvalidParameterError("ROI polygon is self-intersecting");
            }
        }
    }
}

bool point_in_polygon(double x, double y, const std::vector<std::array<double, 2>>& polygon) {
    const std::size_t n = polygon.size();
    const std::array<double, 2> p{x, y};
    // Boundary first: collinear with an edge and inside its bounding box.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % n];
        if (cross2(a, b, p) == 0.0 && on_segment_collinear(a, b, p)) return true;
    }
    // Strict interior by even-odd ray crossing.
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& pi = polygon[i];
        const auto& pj = polygon[j];
        if ((pi[1] > y) != (pj[1] > y)) {
            const double x_at = (pj[0] - pi[0]) * (y - pi[1]) / (pj[1] - pi[1]) + pi[0];
            if (x < x_at) inside = !inside;
        }
    }
    return inside;
}

PointCloudFrame crop_roi(const PointCloudFrame& frame, const RegionOfInterest& roi) {
    validate_roi(roi);
    PointCloudFrame out;
    out.frame_id = frame.frame_id;
    out.timestamp = frame.timestamp;
    out.tag = frame.tag;
    out.points.reserve(frame.points.size());
    for (const Point3& p : frame.points) {
        if (p.z < roi.z_min || p.z > roi.z_max) continue;
        if (point_in_polygon(p.x, p.y, roi.polygon_xy)) out.points.push_back(p);
    }
    return out;
}

std::array<std::int64_t, 3> voxel_index_of(const Point3& p, double voxel_size) {
    return {static_cast<std::int64_t>(std::floor(p.x / voxel_size)),
            static_cast<std::int64_t>(std::floor(p.y / voxel_size)),
            static_cast<std::int64_t>(std::floor(p.z / voxel_size))};
}

PointCloudFrame voxel_downsample(const PointCloudFrame& frame, const VoxelParams& params) {
    if (!(params.voxel_size_sv > 0.0)) {
        throw InvalidParameterError("voxel_size_sv must be > 0");
    }
    std::unordered_map<VoxelKey, VoxelAccum, VoxelKeyHash> cells;
    cells.reserve(frame.points.size());
    for (const Point3& p : frame.points) {
        const auto k = voxel_index_of(p, params.voxel_size_sv);
        VoxelAccum& acc = cells[{k[0], k[1], k[2]}];
        acc.sx += p.x;
        acc.sy += p.y;
        acc.sz += p.z;
        acc.count += 1;
    }
    std::vector<std::pair<VoxelKey, VoxelAccum>> occupied(cells.begin(), cells.end());
    std::sort(occupied.begin(), occupied.end(), [](const auto& a, const auto& b) {
        if (a.first.kx != b.first.kx) return a.first.kx < b.first.kx;
        if (a.first.ky != b.first.ky) return a.first.ky < b.first.ky;
        return a.first.kz < b.first.kz;
    });

    PointCloudFrame out;
    out.frame_id = frame.frame_id;
    out.timestamp = frame.timestamp;
    out.tag = frame.tag;
    out.points.reserve(occupied.size());
    for (const auto& [key, acc] : occupied) {
        const double inv = 1.0 / static_cast<double>(acc.count);
        out.points.push_back({acc.sx * inv, acc.sy * inv, acc.sz * inv});
    }
    return out;
}

TiltAngles estimate_tilt_from_ground(const std::vector<Point3>& ground_points) {
    if (ground_points.size() < 3) {
        throw DegenerateGeometryError("plane fit needs at least 3 ground points");
    }
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const Point3& p : ground_points) mean += Eigen::Vector3d(p.x, p.y, p.z);
    mean /= static_cast<double>(ground_points.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Point3& p : ground_points) {
        const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    // Smallest-eigenvalue direction is the plane normal; the other two span it.
    if (eig.eigenvalues()(1) <= 1e-12 * std::max(eig.eigenvalues()(2), 1.0)) {
        throw DegenerateGeometryError("ground points are collinear; cannot fit a plane");
    }
    Eigen::Vector3d n = eig.eigenvectors().col(0);
    if (n.z() < 0) n = -n;

    // The mounted ground normal is R * e_z = (sin(theta)cos(phi), -sin(phi), cos(theta)cos(phi)).
    const double phi = std::asin(-n.y());
    const double theta = std::atan2(n.x(), n.z());
    return {phi, theta};
}

}  // namespace fsp
