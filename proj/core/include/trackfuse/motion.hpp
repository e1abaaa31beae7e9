#pragma once

#include <Eigen/Dense>

#include "trackfuse/kalman_state.hpp"
#include "trackfuse/types.hpp"

namespace trackfuse {

/// Noise parameters of the constant-velocity filters (dt = 1 frame).
///
/// SortCV7 noise is state dependent: standard deviations scale with the box
/// height analogue h = sqrt(s / r) for the center terms and with the area s
/// for the area terms, weighted by `position_weight` and `velocity_weight`.
/// CentroidCV4 uses a white-acceleration process with `centroid_process_std`
/// and an isotropic pixel measurement noise `centroid_measurement_std`.
/// `process_scale` multiplies Q (0 disables process noise) and
/// `measurement_scale` multiplies R.
struct MotionModelSpec {
    MotionModel model = MotionModel::SortCV7;
    double position_weight = 1.0 / 20.0;
    double velocity_weight = 1.0 / 160.0;
    double centroid_process_std = 1.0;
    double centroid_measurement_std = 1.0;
    double process_scale = 1.0;
    double measurement_scale = 1.0;

    /// Throws InvalidConfig.
    void validate() const;

    static MotionModelSpec sort_defaults() { return {}; }
    static MotionModelSpec centroid_defaults() {
        MotionModelSpec s;
        s.model = MotionModel::CentroidCV4;
        return s;
    }
};

/// Dimension helpers.
int state_dim(MotionModel m) noexcept;
int measurement_dim(MotionModel m) noexcept;

/// Constant-velocity transition matrix F.
Eigen::MatrixXd transition_matrix(MotionModel m);
/// Measurement matrix H selecting the observed components.
Eigen::MatrixXd measurement_matrix(MotionModel m);
/// Process noise Q evaluated at the given mean.
Eigen::MatrixXd process_noise(const KalmanState& state, const MotionModelSpec& spec);
/// Measurement noise R evaluated at the given mean.
Eigen::MatrixXd measurement_noise(const KalmanState& state, const MotionModelSpec& spec);

/// Box -> observation vector for the model: [u, v, s, r] or [cx, cy].
Eigen::VectorXd observe(const BoundingBox& bbox, MotionModel m);

KalmanState kf_init(const BoundingBox& bbox, const MotionModelSpec& spec);
/// mean <- F mean, cov <- F cov F^T + Q. Throws NumericalBreakdown.
KalmanState kf_predict(const KalmanState& state, const MotionModelSpec& spec);
/// Kalman correction against `measurement`. Throws NumericalBreakdown.
KalmanState kf_update(const KalmanState& state, const BoundingBox& measurement,
                      const MotionModelSpec& spec);
/// Inverse of kf_init's conversion. Throws DegenerateGeometry.
BoundingBox state_to_bbox(const KalmanState& state);

/// True when cov is finite, symmetric within 1e-9 and has no eigenvalue
/// below -tol.
bool covariance_is_psd(const Eigen::MatrixXd& cov, double tol = 1e-9);

}  // namespace trackfuse
