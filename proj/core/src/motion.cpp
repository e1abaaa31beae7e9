#include "trackfuse/motion.hpp"

#include <cmath>

namespace trackfuse {

void MotionModelSpec::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(position_weight) || !positive(velocity_weight) || !positive(centroid_process_std) ||
        !positive(centroid_measurement_std) || !positive(measurement_scale)) {
        throw Error(ErrorCode::InvalidConfig, "motion noise scales must be positive");
    }
    if (!std::isfinite(process_scale) || process_scale < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "process_scale must be >= 0");
    }
}

int state_dim(MotionModel m) noexcept { return m == MotionModel::SortCV7 ? 7 : 4; }
int measurement_dim(MotionModel m) noexcept { return m == MotionModel::SortCV7 ? 4 : 2; }

Eigen::MatrixXd transition_matrix(MotionModel m) {
    const int n = state_dim(m);
    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(n, n);
    if (m == MotionModel::SortCV7) {
        f(0, 4) = 1.0;
        f(1, 5) = 1.0;
        f(2, 6) = 1.0;
    } else {
        f(0, 2) = 1.0;
        f(1, 3) = 1.0;
    }
    return f;
}

Eigen::MatrixXd measurement_matrix(MotionModel m) {
    return Eigen::MatrixXd::Identity(measurement_dim(m), state_dim(m));
}

namespace {

// Height analogue of a SORT state: h = sqrt(s / r).
double height_scale(const Eigen::VectorXd& mean) {
    const double s = std::fabs(mean(2));
    const double r = std::fabs(mean(3));
    if (r <= 0.0) return 1.0;
    return std::max(std::sqrt(s / r), 1e-3);
}

double area_scale(const Eigen::VectorXd& mean) { return std::max(std::fabs(mean(2)), 1e-3); }

Eigen::MatrixXd initial_covariance(const KalmanState& state, const MotionModelSpec& spec) {
    const int n = state_dim(state.model);
    Eigen::VectorXd std_dev(n);
    if (state.model == MotionModel::SortCV7) {
        const double h = height_scale(state.mean);
        const double s = area_scale(state.mean);
        std_dev << 2.0 * spec.position_weight * h, 2.0 * spec.position_weight * h,
            2.0 * spec.position_weight * s, 1e-2, 10.0 * spec.velocity_weight * h,
            10.0 * spec.velocity_weight * h, 10.0 * spec.velocity_weight * s;
    } else {
        const double p = spec.centroid_measurement_std;
        const double v = 10.0 * spec.centroid_process_std;
        std_dev << p, p, v, v;
    }
    return std_dev.array().square().matrix().asDiagonal();
}

void symmetrize(Eigen::MatrixXd& cov) { cov = 0.5 * (cov + cov.transpose()); }

}  // namespace

Eigen::MatrixXd process_noise(const KalmanState& state, const MotionModelSpec& spec) {
    const int n = state_dim(state.model);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    if (state.model == MotionModel::SortCV7) {
        const double h = height_scale(state.mean);
        const double s = area_scale(state.mean);
        Eigen::VectorXd std_dev(n);
        std_dev << spec.position_weight * h, spec.position_weight * h, spec.position_weight * s, 1e-2,
            spec.velocity_weight * h, spec.velocity_weight * h, spec.velocity_weight * s;
        q = std_dev.array().square().matrix().asDiagonal();
    } else {
        // Piecewise-constant white acceleration, per axis.
        const double var = spec.centroid_process_std * spec.centroid_process_std;
        for (int axis = 0; axis < 2; ++axis) {
            q(axis, axis) = 0.25 * var;
            q(axis, axis + 2) = 0.5 * var;
            q(axis + 2, axis) = 0.5 * var;
            q(axis + 2, axis + 2) = var;
        }
    }
    return spec.process_scale * q;
}

Eigen::MatrixXd measurement_noise(const KalmanState& state, const MotionModelSpec& spec) {
    const int m = measurement_dim(state.model);
    Eigen::VectorXd std_dev(m);
    if (state.model == MotionModel::SortCV7) {
        const double h = height_scale(state.mean);
        const double s = area_scale(state.mean);
        std_dev << spec.position_weight * h, spec.position_weight * h, spec.position_weight * s, 1e-1;
    } else {
        std_dev << spec.centroid_measurement_std, spec.centroid_measurement_std;
    }
    return spec.measurement_scale * Eigen::MatrixXd(std_dev.array().square().matrix().asDiagonal());
}

Eigen::VectorXd observe(const BoundingBox& bbox, MotionModel m) {
    if (m == MotionModel::SortCV7) {
        Eigen::VectorXd z(4);
        z << bbox.center_x(), bbox.center_y(), bbox.area(), bbox.width() / bbox.height();
        return z;
    }
    Eigen::VectorXd z(2);
    z << bbox.center_x(), bbox.center_y();
    return z;
}

bool covariance_is_psd(const Eigen::MatrixXd& cov, double tol) {
    if (!cov.allFinite()) return false;
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) return false;
    return eig.eigenvalues().minCoeff() >= -tol;
}

KalmanState kf_init(const BoundingBox& bbox, const MotionModelSpec& spec) {
    KalmanState state;
    state.model = spec.model;
    state.width = bbox.width();
    state.height = bbox.height();
    const int n = state_dim(spec.model);
    state.mean = Eigen::VectorXd::Zero(n);
    state.mean.head(measurement_dim(spec.model)) = observe(bbox, spec.model);
    state.cov = initial_covariance(state, spec);
    return state;
}

KalmanState kf_predict(const KalmanState& state, const MotionModelSpec& spec) {
    const Eigen::MatrixXd f = transition_matrix(state.model);
    KalmanState next = state;
    next.mean = f * state.mean;
    next.cov = f * state.cov * f.transpose() + process_noise(state, spec);
    symmetrize(next.cov);
    if (!next.mean.allFinite() || !covariance_is_psd(next.cov)) {
        throw Error(ErrorCode::NumericalBreakdown, "covariance lost positive semi-definiteness in predict");
    }
    return next;
}

KalmanState kf_update(const KalmanState& state, const BoundingBox& measurement, const MotionModelSpec& spec) {
    const Eigen::MatrixXd h = measurement_matrix(state.model);
    const Eigen::MatrixXd r = measurement_noise(state, spec);
    const Eigen::VectorXd z = observe(measurement, state.model);

    const Eigen::VectorXd innovation = z - h * state.mean;
    const Eigen::MatrixXd s = h * state.cov * h.transpose() + r;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NumericalBreakdown, "innovation covariance is not invertible");
    }
    // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
    const Eigen::MatrixXd gain = llt.solve(h * state.cov).transpose();

    KalmanState next = state;
    next.mean = state.mean + gain * innovation;
    // Joseph form keeps the posterior symmetric PSD under rounding.
    const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(state.cov.rows(), state.cov.cols()) - gain * h;
    next.cov = ikh * state.cov * ikh.transpose() + gain * r * gain.transpose();
    symmetrize(next.cov);
    next.width = measurement.width();
    next.height = measurement.height();
    if (!next.mean.allFinite() || !covariance_is_psd(next.cov)) {
        throw Error(ErrorCode::NumericalBreakdown, "covariance lost positive semi-definiteness in update");
    }
    return next;
}

BoundingBox state_to_bbox(const KalmanState& state) {
    if (state.model == MotionModel::SortCV7) {
        const double s = state.mean(2);
        const double r = state.mean(3);
        if (!(s > 0.0) || !(r > 0.0)) {
            throw Error(ErrorCode::DegenerateGeometry, "area or aspect ratio is not positive");
        }
        const double w = std::sqrt(s * r);
        const double hgt = s / w;
        const double u = state.mean(0);
        const double v = state.mean(1);
        return BoundingBox{u - 0.5 * w, v - 0.5 * hgt, u + 0.5 * w, v + 0.5 * hgt};
    }
    if (!(state.width > 0.0) || !(state.height > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "centroid state carries no positive extent");
    }
    const double cx = state.mean(0);
    const double cy = state.mean(1);
    return BoundingBox{cx - 0.5 * state.width, cy - 0.5 * state.height, cx + 0.5 * state.width,
                       cy + 0.5 * state.height};
}

}  // namespace trackfuse
