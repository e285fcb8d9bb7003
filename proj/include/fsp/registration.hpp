#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsp/geodesy.hpp"
#include "fsp/types.hpp"

namespace fsp {

/// Rigid map p_enu = R * p_lidar + t with R in SO(3).
struct RigidTransform3D {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

EnuCoord apply_extrinsic(const RigidTransform3D& tf, const Point3& p);
RigidTransform3D invert(const RigidTransform3D& tf);

/// Yaw rotation embedded in 3-D (z axis unchanged).
Eigen::Matrix3d yaw_rotation(double theta);

struct Correspondence {
    Point3 lidar;
    EnuCoord enu;
};

struct CorrespondenceSet {
    std::vector<Correspondence> pairs;
};

struct ErrorReport {
    std::vector<double> per_point;
    double mean = 0.0;
    double max = 0.0;
};

struct StaticRegistrationResult {
    RigidTransform3D transform;
    ErrorReport residuals;           // against the input pairs
    double collinearity_ratio = 0.0; // s2 / s1 of the centered LiDAR points
    bool near_collinear = false;     // ratio below the warning band (1e-2)
};

/// Closed-form least-squares rigid registration (centroid subtraction +
/// cross-covariance SVD with determinant sign correction). Throws
/// DegenerateGeometryError for N < 3 or collinear LiDAR points
/// (collinearity ratio below 1e-6).
StaticRegistrationResult estimate_static_extrinsic(const CorrespondenceSet& correspondences);

struct TrajectorySample {
    Point3 position;
    double cumulative_arclength = 0.0;
};

/// Resample a polyline at uniform arc-length spacing after dropping
/// consecutive duplicate points; the endpoint is always included.
/// Throws DegenerateGeometryError when fewer than 2 distinct points remain
/// and InvalidParameterError on spacing <= 0.
std::vector<TrajectorySample> resample_by_arclength(const std::vector<Point3>& trajectory,
                                                    double spacing);

/// Yaw + planar translation + vertical offset refinement.
struct PlanarRefinement {
    double theta_yaw = 0.0;                        // radians, (-pi, pi]
    Eigen::Vector2d t_xy = Eigen::Vector2d::Zero();
    double delta_z = 0.0;                          // mean z_gps - mean z_lidar
};

struct TrajectoryPair {
    std::vector<TrajectorySample> lidar_enu;
    std::vector<TrajectorySample> gps_enu;
};

/// Closed-form 2-D rigid alignment of the LiDAR-in-ENU trajectory onto the
/// GPS trajectory; samples pair index-wise after truncation to the shorter
/// length. Multiple trajectories stack all pairs into one least-squares
/// problem. Throws InsufficientDataError below 3 paired samples.
PlanarRefinement refine_planar_and_vertical(const std::vector<TrajectoryPair>& trajectories);
PlanarRefinement refine_planar_and_vertical(const std::vector<TrajectorySample>& lidar_enu,
                                            const std::vector<TrajectorySample>& gps_enu);

/// R_final = R_z R0, t_final = R_z t0 + [t_xy, dz].
RigidTransform3D compose_final(const RigidTransform3D& initial, const PlanarRefinement& refine);

/// e_i = ||R p_i + t - q_i|| over the correspondences.
ErrorReport static_registration_error(const CorrespondenceSet& correspondences,
                                      const RigidTransform3D& tf);

/// Horizontal-only trajectory error, paired index-wise (truncated to the
/// shorter input). Throws InsufficientDataError when no pairs remain.
ErrorReport trajectory_alignment_error(const std::vector<TrajectorySample>& lidar_enu,
                                       const std::vector<TrajectorySample>& gps_enu);

/// Persisted calibration: ENU reference, extrinsic and error summaries.
struct CalibrationArtifact {
    EnuReference enu_reference;
    RigidTransform3D transform;
    double static_error_mean = 0.0;
    double static_error_max = 0.0;
    std::optional<double> trajectory_error_mean;
    std::optional<double> trajectory_error_max;
    std::string created_at;
};

void save_calibration(const CalibrationArtifact& artifact, const std::string& path);
CalibrationArtifact load_calibration(const std::string& path);

}  // namespace fsp
