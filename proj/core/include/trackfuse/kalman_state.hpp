#pragma once

#include <Eigen/Dense>

namespace trackfuse {

enum class MotionModel {
    /// SORT layout [u, v, s, r, du, dv, ds]: center, area, aspect ratio, velocities.
    SortCV7,
    /// [cx, cy, dcx, dcy]: centroid position and velocity.
    CentroidCV4,
};

struct KalmanState {
    MotionModel model = MotionModel::SortCV7;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    /// Last observed box size; CentroidCV4 carries extent outside the state.
    double width = 0.0;
    double height = 0.0;
};

}  // namespace trackfuse
