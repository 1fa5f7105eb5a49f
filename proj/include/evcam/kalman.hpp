#pragma once

#include <Eigen/Core>

namespace evcam {

/// Constant-velocity filter over (row, col, v_row, v_col) with a
/// position-only measurement.
struct KalmanState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
};

struct KalmanNoise {
    double process = 0.5;      // white-acceleration spectral density
    double measurement = 1.0;  // per-axis position variance, px^2
};

inline constexpr double kCovarianceJitter = 1e-9;

KalmanState kalman_init(double row, double col, double initial_velocity_var = 4.0,
                        double initial_position_var = 1.0);

/// x <- F x, P <- F P F' + Q, with Q the discretized white-acceleration noise.
KalmanState kalman_predict(const KalmanState& s, double dt, double process_noise);

/// Standard update. The returned covariance is symmetrized; if it is not
/// positive semidefinite, kCovarianceJitter * I is added until it is and
/// `degenerate` is set.
KalmanState kalman_update(const KalmanState& s, double meas_row, double meas_col, double measurement_noise,
                          bool* degenerate = nullptr);

}  // namespace evcam
