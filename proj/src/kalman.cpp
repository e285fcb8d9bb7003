#include "fsp/kalman.hpp"

#include <cmath>

namespace fsp {

NoiseParams make_noise_params(double dt, double q_pos, double q_vel, double r_sigma) {
    NoiseParams np;
    const double qp = q_pos * dt * dt;
    const double qv = q_vel * dt;
    np.Q.diagonal() << qp, qp, qp, qv, qv, qv;
    np.R = (r_sigma * r_sigma) * Eigen::Matrix3d::Identity();
    return np;
}

Matrix6 transition_matrix(double dt) {
    Matrix6 a = Matrix6::Identity();
    a(0, 3) = dt;
    a(1, 4) = dt;
    a(2, 5) = dt;
    return a;
}

Matrix3x6 measurement_matrix() {
    Matrix3x6 h = Matrix3x6::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    h(2, 2) = 1.0;
    return h;
}

KalmanState kf_predict(const KalmanState& state, double dt, const Matrix6& Q) {
    if (!(dt > 0.0)) throw InvalidParameterError("kf_predict requires dt > 0");
    const Matrix6 a = transition_matrix(dt);
    KalmanState out;
    out.x = a * state.x;
    out.P = a * state.P * a.transpose() + Q;
    out.P = 0.5 * (out.P + out.P.transpose());
    return out;
}

KfUpdateResult kf_update(const KalmanState& state, const Point3& z, const Eigen::Matrix3d& R) {
    const Matrix3x6 h = measurement_matrix();
    const Eigen::Vector3d zv(z.x, z.y, z.z);

    const Eigen::Matrix3d s = h * state.P * h.transpose() + R;
    const double det = s.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300) {
        throw NumericalError("singular innovation covariance in kf_update");
    }
    const Eigen::Matrix<double, 6, 3> k = state.P * h.transpose() * s.inverse();

    KfUpdateResult out;
    out.innovation = zv - h * state.x;
    out.state.x = state.x + k * out.innovation;
    out.state.P = (Matrix6::Identity() - k * h) * state.P;
    out.state.P = 0.5 * (out.state.P + out.state.P.transpose());
    return out;
}

}  // namespace fsp
