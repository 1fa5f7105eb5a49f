#include "evcam/kalman.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace evcam {

KalmanState kalman_init(double row, double col, double initial_velocity_var, double initial_position_var) {
    KalmanState s;
    s.x << row, col, 0.0, 0.0;
    s.P = Eigen::Vector4d(initial_position_var, initial_position_var, initial_velocity_var, initial_velocity_var)
              .asDiagonal();
    return s;
}

KalmanState kalman_predict(const KalmanState& s, double dt, double process_noise) {
    if (!(dt > 0.0)) throw std::invalid_argument("kalman_predict needs dt > 0");
    Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
    F(0, 2) = dt;
    F(1, 3) = dt;

    const double dt2 = dt * dt;
    const double q11 = dt2 * dt / 3.0 * process_noise;
    const double q12 = dt2 / 2.0 * process_noise;
    const double q22 = dt * process_noise;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(0, 0) = Q(1, 1) = q11;
    Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = q12;
    Q(2, 2) = Q(3, 3) = q22;

    KalmanState out;
    out.x = F * s.x;
    out.P = F * s.P * F.transpose() + Q;
    return out;
}

KalmanState kalman_update(const KalmanState& s, double meas_row, double meas_col, double measurement_noise,
                          bool* degenerate) {
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;
    const Eigen::Vector2d z(meas_row, meas_col);
    const Eigen::Matrix2d R = Eigen::Matrix2d::Identity() * measurement_noise;

    const Eigen::Vector2d y = z - H * s.x;
    const Eigen::Matrix2d S = H * s.P * H.transpose() + R;
    // A singular innovation covariance means a noiseless, certain prediction: no correction.
    const Eigen::Matrix<double, 4, 2> K = std::abs(S.determinant()) > 0.0
                                              ? Eigen::Matrix<double, 4, 2>(s.P * H.transpose() * S.inverse())
                                              : Eigen::Matrix<double, 4, 2>::Zero();

    KalmanState out;
    out.x = s.x + K * y;
    out.P = (Eigen::Matrix4d::Identity() - K * H) * s.P;
    out.P = 0.5 * (out.P + out.P.transpose());

    bool bad = false;
    for (int i = 0; i < 64; ++i) {
        Eigen::LDLT<Eigen::Matrix4d> ldlt(out.P);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() >= 0.0).all()) break;
        bad = true;
        out.P += kCovarianceJitter * Eigen::Matrix4d::Identity();
    }
    if (degenerate) *degenerate = bad;
    return out;
}

}  // namespace evcam
