#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "trackfuse/motion.hpp"

using namespace trackfuse;
using testutil::code_of;

namespace {

oracle::Matrix to_oracle(const Eigen::MatrixXd& m) {
    oracle::Matrix o(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) o(std::size_t(i), std::size_t(j)) = m(i, j);
    return o;
}

double relative_error(const Eigen::MatrixXd& got, const oracle::Matrix& want) {
    long double num = 0, den = 0;
    for (Eigen::Index i = 0; i < got.rows(); ++i) {
        for (Eigen::Index j = 0; j < got.cols(); ++j) {
            const long double w = want(std::size_t(i), std::size_t(j));
            num += (got(i, j) - w) * (got(i, j) - w);
            den += w * w;
        }
    }
    return static_cast<double>(std::sqrt(num) / std::max(std::sqrt(den), 1e-300L));
}

}  // namespace

TEST_SUITE("motion") {

TEST_CASE("kf_init state layouts") {
    const auto sort = MotionModelSpec::sort_defaults();
    auto s = kf_init({0, 0, 2, 2}, sort);
    CHECK(s.mean.size() == 7);
    Eigen::VectorXd want(7);
    want << 1, 1, 4, 1, 0, 0, 0;
    CHECK(s.mean.isApprox(want));
    s = kf_init({0, 0, 2, 4}, sort);
    want << 1, 2, 8, 0.5, 0, 0, 0;
    CHECK(s.mean.isApprox(want));
    const auto c = kf_init({10, 10, 20, 20}, MotionModelSpec::centroid_defaults());
    Eigen::VectorXd cwant(4);
    cwant << 15, 15, 0, 0;
    CHECK(c.mean.isApprox(cwant));
    CHECK(covariance_is_psd(c.cov));
}

TEST_CASE("kf_predict examples") {
    auto spec = MotionModelSpec::sort_defaults();
    spec.process_scale = 0.0;
    const auto s = kf_init({3, 4, 9, 12}, spec);
    const auto p = kf_predict(s, spec);
    CHECK(p.mean.head(4).isApprox(s.mean.head(4)));

    auto cspec = MotionModelSpec::centroid_defaults();
    KalmanState c = kf_init({-1, -1, 1, 1}, cspec);
    c.mean << 0, 0, 1, 2;
    const auto cp = kf_predict(c, cspec);
    CHECK(cp.mean(0) == 1.0);
    CHECK(cp.mean(1) == 2.0);
}

TEST_CASE("kf_update with zero innovation leaves the mean unchanged") {
    const auto spec = MotionModelSpec::sort_defaults();
    const BoundingBox box{10, 20, 50, 100};
    const auto s = kf_predict(kf_init(box, spec), spec);
    const auto u = kf_update(s, box, spec);
    CHECK((u.mean - s.mean).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("kf_update contracts the observed block") {
    const auto spec = MotionModelSpec::centroid_defaults();
    const auto s = kf_predict(kf_init({0, 0, 10, 10}, spec), spec);
    const auto u = kf_update(s, {2, 1, 12, 11}, spec);
    CHECK(u.cov.topLeftCorner(2, 2).trace() <= s.cov.topLeftCorner(2, 2).trace());
}

TEST_CASE("predict/update agree with the dense extended-precision oracle") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> pos(0, 500), size(10, 80), step(-5, 5);
    for (auto model : {MotionModel::SortCV7, MotionModel::CentroidCV4}) {
        MotionModelSpec spec = model == MotionModel::SortCV7 ? MotionModelSpec::sort_defaults()
                                                             : MotionModelSpec::centroid_defaults();
        for (int trial = 0; trial < 50; ++trial) {
            const double x = pos(gen), y = pos(gen), w = size(gen), h = size(gen);
            KalmanState st = kf_init({x, y, x + w, y + h}, spec);
            // Predict: Q is evaluated at the prior mean.
            auto xo = to_oracle(st.mean);
            auto po = to_oracle(st.cov);
            oracle::kalman_predict(xo, po, to_oracle(transition_matrix(model)), to_oracle(process_noise(st, spec)));
            const auto pred = kf_predict(st, spec);
            CHECK(relative_error(pred.mean, xo) <= 1e-9);
            CHECK(relative_error(pred.cov, po) <= 1e-9);

            const double dx = step(gen), dy = step(gen);
            const BoundingBox z{x + dx, y + dy, x + dx + w * 1.05, y + dy + h * 0.97};
            oracle::kalman_update(xo, po, to_oracle(measurement_matrix(model)),
                                  to_oracle(measurement_noise(pred, spec)), to_oracle(observe(z, model)));
            const auto upd = kf_update(pred, z, spec);
            CHECK(relative_error(upd.mean, xo) <= 1e-9);
            CHECK(relative_error(upd.cov, po) <= 1e-9);
            CHECK(covariance_is_psd(upd.cov));
        }
    }
}

TEST_CASE("covariance stays PSD over random predict/update sequences") {
    std::mt19937_64 gen(37);
    std::uniform_real_distribution<double> u(0, 1);
    int steps = 0;
    for (int seq = 0; seq < 200; ++seq) {
        const auto model = seq % 2 ? MotionModel::SortCV7 : MotionModel::CentroidCV4;
        MotionModelSpec spec = model == MotionModel::SortCV7 ? MotionModelSpec::sort_defaults()
                                                             : MotionModelSpec::centroid_defaults();
        double x = 100 + 300 * u(gen), y = 100 + 300 * u(gen), w = 20 + 60 * u(gen), h = 20 + 60 * u(gen);
        KalmanState st = kf_init({x, y, x + w, y + h}, spec);
        for (int t = 0; t < 50; ++t, ++steps) {
            st = kf_predict(st, spec);
            CHECK(covariance_is_psd(st.cov));
            if (u(gen) < 0.8) {
                x += 4 * (u(gen) - 0.5);
                y += 4 * (u(gen) - 0.5);
                st = kf_update(st, {x, y, x + w * (0.9 + 0.2 * u(gen)), y + h * (0.9 + 0.2 * u(gen))}, spec);
                CHECK(covariance_is_psd(st.cov));
            }
        }
    }
    CHECK(steps == 10000);
}

TEST_CASE("repeated updates with Q = 0 and small R converge to the measurement") {
    auto spec = MotionModelSpec::centroid_defaults();
    spec.process_scale = 0.0;
    spec.measurement_scale = 1e-6;
    KalmanState st = kf_init({0, 0, 10, 10}, spec);
    const BoundingBox z{40, 30, 50, 40};
    double prev = INFINITY;
    for (int i = 0; i < 5; ++i) {
        st = kf_update(st, z, spec);
        const double dist = (st.mean.head(2) - observe(z, MotionModel::CentroidCV4)).norm();
        CHECK(dist <= prev);
        prev = dist;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("state_to_bbox inverts kf_init") {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> pos(-100, 500), size(0.5, 90);
    for (int trial = 0; trial < 500; ++trial) {
        const double x = pos(gen), y = pos(gen);
        const BoundingBox b{x, y, x + size(gen), y + size(gen)};
        for (auto spec : {MotionModelSpec::sort_defaults(), MotionModelSpec::centroid_defaults()}) {
            const auto back = state_to_bbox(kf_init(b, spec));
            CHECK(std::fabs(back.x1 - b.x1) <= 1e-9);
            CHECK(std::fabs(back.y1 - b.y1) <= 1e-9);
            CHECK(std::fabs(back.x2 - b.x2) <= 1e-9);
            CHECK(std::fabs(back.y2 - b.y2) <= 1e-9);
        }
    }
    KalmanState s = kf_init({0, 0, 2, 4}, MotionModelSpec::sort_defaults());
    s.mean << 1, 1, 4, 1, 0, 0, 0;
    const auto b = state_to_bbox(s);
    CHECK(b.x1 == doctest::Approx(0.0));
    CHECK(b.x2 == doctest::Approx(2.0));
    CHECK(b.y2 == doctest::Approx(2.0));
    s.mean(2) = -1;
    CHECK(code_of([&] { state_to_bbox(s); }) == ErrorCode::DegenerateGeometry);
}

TEST_CASE("motion spec validation") {
    auto spec = MotionModelSpec::sort_defaults();
    spec.measurement_scale = 0;
    CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidConfig);
    spec = MotionModelSpec::sort_defaults();
    spec.process_scale = -1;
    CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidConfig);
}

}
