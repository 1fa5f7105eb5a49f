#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "evcam/kalman.hpp"
#include "oracles.hpp"

using namespace evcam;

namespace {

oracle::Kalman to_oracle(const KalmanState& s) {
    oracle::Kalman k;
    for (int i = 0; i < 4; ++i) {
        k.x[i] = s.x(i);
        for (int j = 0; j < 4; ++j) k.P[i][j] = s.P(i, j);
    }
    return k;
}

double max_diff(const KalmanState& s, const oracle::Kalman& k) {
    double m = 0;
    for (int i = 0; i < 4; ++i) {
        m = std::max(m, std::abs(s.x(i) - k.x[i]));
        for (int j = 0; j < 4; ++j) m = std::max(m, std::abs(s.P(i, j) - k.P[i][j]));
    }
    return m;
}

}  // namespace

TEST_SUITE("kalman") {
    TEST_CASE("init places the state at the measurement with zero velocity") {
        const auto s = kalman_init(12.5, 40.0, 4.0, 1.0);
        CHECK(s.x(0) == 12.5);
        CHECK(s.x(1) == 40.0);
        CHECK(s.x(2) == 0.0);
        CHECK(s.x(3) == 0.0);
        CHECK(s.P(0, 0) == 1.0);
        CHECK(s.P(2, 2) == 4.0);
    }

    TEST_CASE("constant-velocity prediction") {
        auto s = kalman_init(10, 10);
        s.x(2) = 1.0;
        const auto p = kalman_predict(s, 1.0, 0.5);
        CHECK(p.x(0) == doctest::Approx(11.0));
        CHECK(p.x(1) == doctest::Approx(10.0));
        CHECK(p.x(2) == doctest::Approx(1.0));
    }

    TEST_CASE("noiseless update at the predicted position leaves the state unchanged") {
        auto s = kalman_init(20, 30);
        s.x(2) = 0.5;
        s.x(3) = -1.5;
        const auto p = kalman_predict(s, 1.0, 0.0);
        const auto u = kalman_update(p, p.x(0), p.x(1), 0.0);
        for (int i = 0; i < 4; ++i) CHECK(u.x(i) == doctest::Approx(p.x(i)));

        // Second round on a now-singular covariance.
        const auto p2 = kalman_predict(u, 1.0, 0.0);
        const auto u2 = kalman_update(p2, p2.x(0), p2.x(1), 0.0);
        for (int i = 0; i < 4; ++i) CHECK(u2.x(i) == doctest::Approx(p2.x(i)));
    }

    TEST_CASE("prediction rejects a non-positive step") {
        CHECK_THROWS(kalman_predict(kalman_init(0, 0), 0.0, 1.0));
    }

    TEST_CASE("matches the matrix-form oracle over random sequences") {
        Rng rng(31);
        double worst = 0;
        for (int seq = 0; seq < 100; ++seq) {
            const double q = rng.uniform(0.01, 2.0);
            const double r = rng.uniform(0.1, 4.0);
            auto s = kalman_init(rng.uniform(0, 63), rng.uniform(0, 127), rng.uniform(0.5, 8), rng.uniform(0.5, 4));
            auto o = to_oracle(s);
            for (int step = 0; step < 50; ++step) {
                const double dt = rng.uniform(0.5, 2.0);
                s = kalman_predict(s, dt, q);
                o.predict(dt, q);
                if (rng.uniform() < 0.8) {
                    const double zr = s.x(0) + rng.uniform(-3, 3);
                    const double zc = s.x(1) + rng.uniform(-3, 3);
                    bool degenerate = false;
                    s = kalman_update(s, zr, zc, r, &degenerate);
                    o.update(zr, zc, r);
                    CHECK_FALSE(degenerate);
                }
                worst = std::max(worst, max_diff(s, o));
                REQUIRE((s.P - s.P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
        CHECK(worst < 1e-9);
    }

    TEST_CASE("covariance stays positive semidefinite") {
        Rng rng(32);
        auto s = kalman_init(30, 60);
        for (int step = 0; step < 500; ++step) {
            s = kalman_predict(s, 1.0, 1e-6);
            s = kalman_update(s, 30 + rng.uniform(-1, 1), 60 + rng.uniform(-1, 1), 1e-6);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(s.P);
            REQUIRE(es.eigenvalues().minCoeff() >= -1e-12);
        }
    }
}
