#pragma once

#include <Eigen/Dense>

#include "fsp/types.hpp"

namespace fsp {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix3x6 = Eigen::Matrix<double, 3, 6>;

/// Constant-velocity state [x, y, z, vx, vy, vz] with its error covariance.
struct KalmanState {
    Vector6 x = Vector6::Zero();
    Matrix6 P = Matrix6::Identity();
};

/// Process / measurement covariances of the constant-velocity model.
struct NoiseParams {
    Matrix6 Q = Matrix6::Zero();
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
};

/// Block-diagonal defaults: position variance q_pos * dt^2, velocity variance
/// q_vel * dt per axis, R = r_sigma^2 * I.
NoiseParams make_noise_params(double dt, double q_pos = 0.1, double q_vel = 1.0,
                              double r_sigma = 0.2);

/// State transition with the positions-from-velocities block set to dt.
Matrix6 transition_matrix(double dt);

/// Measurement matrix selecting the position block.
Matrix3x6 measurement_matrix();

/// x' = A x, P' = A P A^T + Q, symmetry restored. Throws on dt <= 0.
KalmanState kf_predict(const KalmanState& state, double dt, const Matrix6& Q);

struct KfUpdateResult {
    KalmanState state;
    Eigen::Vector3d innovation;  // z - H x_pred, kept as a diagnostic
};

/// Standard gain-form update with the position measurement z.
/// Throws NumericalError when the innovation covariance is singular.
KfUpdateResult kf_update(const KalmanState& state, const Point3& z, const Eigen::Matrix3d& R);

}  // namespace fsp
