#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "fsp/types.hpp"

namespace fsp {

/// Sensor mounting angles in radians, both restricted to (-pi/2, pi/2).
struct TiltAngles {
    double roll_phi = 0.0;
    double pitch_theta = 0.0;
};

using RotationMatrix3 = Eigen::Matrix3d;

/// 2-D polygon (x-y plane of the leveled frame) extruded over [z_min, z_max].
/// The polygon must be simple (non-self-intersecting) with >= 3 vertices.
struct RegionOfInterest {
    std::vector<std::array<double, 2>> polygon_xy;
    double z_min = -100.0;
    double z_max = 100.0;
};

struct VoxelParams {
    double voxel_size_sv = 0.2;  // meters, > 0
};

/// True when R is orthonormal with determinant +1 within tol per entry.
bool is_rotation_matrix(const RotationMatrix3& R, double tol = 1e-9);

/// Mounting rotation R = R_y(pitch) * R_x(roll).
/// Throws InvalidParameterError when an angle leaves (-pi/2, pi/2).
RotationMatrix3 build_rotation(const TiltAngles& angles);

/// Undo the mounting rotation: every point is mapped p' = R^T p, producing a
/// leveled cloud with an upright z-axis. Requires tag == SensorFrame, throws
/// StateError otherwise. Point count and order are preserved.
PointCloudFrame correct_frame(const PointCloudFrame& frame, const RotationMatrix3& R);

/// Validate ROI invariants (>= 3 vertices, simple polygon, z_min < z_max).
/// Throws InvalidParameterError naming the problem.
void validate_roi(const RegionOfInterest& roi);

/// Inclusive point-in-polygon test: points on an edge or vertex count as inside.
bool point_in_polygon(double x, double y, const std::vector<std::array<double, 2>>& polygon);

/// Keep exactly the points with (x, y) inside-or-on the polygon and
/// z in [z_min, z_max]; relative order preserved. Boundary is inclusive so
/// the operation is idempotent.
PointCloudFrame crop_roi(const PointCloudFrame& frame, const RegionOfInterest& roi);

/// Voxel index of a point under floor semantics (boundary points take the
/// index floor(x / s) itself).
std::array<std::int64_t, 3> voxel_index_of(const Point3& p, double voxel_size);

/// Replace all points sharing a cubic voxel of side voxel_size_sv by their
/// centroid. Output is ordered by ascending lexicographic voxel index
/// (k_x, k_y, k_z) so identical inputs give identical outputs.
PointCloudFrame voxel_downsample(const PointCloudFrame& frame, const VoxelParams& params);

/// Fit a plane to operator-marked ground points (PCA normal) and derive the
/// mounting angles that build_rotation/correct_frame would need to level it.
/// Throws DegenerateGeometryError when the points do not span a plane.
TiltAngles estimate_tilt_from_ground(const std::vector<Point3>& ground_points);

}  // namespace fsp
