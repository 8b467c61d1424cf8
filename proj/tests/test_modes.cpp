#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nlmodes/dynamics.hpp"
#include "nlmodes/errors.hpp"
#include "nlmodes/geodesics.hpp"
#include "nlmodes/modes.hpp"

using namespace nlmodes;
using std::numbers::pi;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }

std::vector<Vector> line(const Vector& a, const Vector& b, int n) {
    std::vector<Vector> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(a + (b - a) * (static_cast<double>(i) / (n - 1)));
    }
    return out;
}

Matrix sampled(int n, double dt, const std::function<double(double)>& x) {
    Matrix m(n, 1);
    for (int i = 0; i < n; ++i) {
        m(i, 0) = x(i * dt);
    }
    return m;
}

}  // namespace

TEST(LinearizedModes, DoublePendulumClosedForm) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const auto modes = linearized_modes(m, f, v2(0, 0));
    ASSERT_EQ(modes.size(), 2u);
    // 100 v = w^2 g v, so w^2 = 100 / lambda for the eigenvalues 3 -+ 2 sqrt 2 of g(0, 0)
    const double slow = std::sqrt(100.0 / (3.0 + 2.0 * std::sqrt(2.0)));
    const double fast = std::sqrt(100.0 / (3.0 - 2.0 * std::sqrt(2.0)));
    EXPECT_NEAR(modes[0].omega / slow, 1.0, 1e-9);
    EXPECT_NEAR(modes[1].omega / fast, 1.0, 1e-9);
    EXPECT_NEAR(modes[0].omega, 4.1421, 1e-4);
    EXPECT_NEAR(modes[1].omega, 24.142, 1e-3);

    const Matrix g = m.eval(v2(0, 0));
    const Matrix h = potential_hessian(f, v2(0, 0));
    for (const auto& mode : modes) {
        const Vector& v = mode.g_normalized;
        EXPECT_NEAR(v.dot(g * v), 1.0, 1e-12);
        EXPECT_LT((h * v + mode.omega * mode.omega * g * v).norm(), 1e-9 * mode.omega * mode.omega);
        EXPECT_NEAR(mode.direction.norm(), 1.0, 1e-14);
        EXPECT_GT(mode.direction[0], 0.0);
    }
    EXPECT_NEAR(inner_product(m, v2(0, 0), modes[0].g_normalized, modes[1].g_normalized), 0.0, 1e-12);
    EXPECT_NEAR(std::atan2(modes[0].direction[1], modes[0].direction[0]), pi / 8, 1e-9);
    EXPECT_NEAR(std::atan2(modes[1].direction[1], modes[1].direction[0]), -3 * pi / 8, 1e-9);
}

TEST(LinearizedModes, RejectsNonEquilibrium) {
    EXPECT_THROW((void)linearized_modes(double_pendulum_metric(), circular_potential(100.0), v2(0.1, 0)),
                 InvalidArgument);
}

TEST(EquipotentialPoint, CircularPotential) {
    const auto f = circular_potential(100.0);
    const Vector a = equipotential_point(f, 0.5, 0.0);
    EXPECT_NEAR(a[0], 0.1, 1e-10);
    EXPECT_NEAR(a[1], 0.0, 1e-15);
    const Vector b = equipotential_point(f, 0.5, pi / 2);
    EXPECT_NEAR(b[0], 0.0, 1e-15);
    EXPECT_NEAR(b[1], 0.1, 1e-10);
    for (double th : {0.3, 2.0, -1.0}) {
        EXPECT_NEAR(f.value(equipotential_point(f, 7.0, th)), -7.0, 1e-9);
    }
}

TEST(PeriodicityMeasure, SinusoidScoresNearOne) {
    EXPECT_GE(periodicity_measure(sampled(20000, 1e-2, [](double t) { return std::sin(2.3 * t); })), 0.999);
}

TEST(PeriodicityMeasure, WhiteNoiseScoresLow) {
    std::mt19937 rng(1234);
    std::normal_distribution<double> n01;
    int below = 0;
    for (int k = 0; k < 100; ++k) {
        Matrix m(20000, 1);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            m(i, 0) = n01(rng);
        }
        below += periodicity_measure(m) < 0.2 ? 1 : 0;
    }
    EXPECT_EQ(below, 100);
}

TEST(PeriodicityMeasure, QuasiPeriodicBelowSinusoid) {
    const double pure = periodicity_measure(sampled(20000, 1e-2, [](double t) { return std::cos(t); }));
    const double quasi =
        periodicity_measure(sampled(20000, 1e-2, [](double t) { return std::cos(t) + std::cos(std::sqrt(2.0) * t); }));
    EXPECT_LT(quasi, pure);
    EXPECT_GE(quasi, 0.0);
    EXPECT_LE(pure, 1.0);
}

TEST(PeriodicityMeasure, ConstantChannelsAreIgnored) {
    Matrix m = sampled(5000, 1e-2, [](double t) { return std::sin(t); });
    Matrix two(5000, 2);
    two << m, Matrix::Constant(5000, 1, 3.0);
    EXPECT_NEAR(periodicity_measure(two), periodicity_measure(m), 1e-12);
}

TEST(DetectPeriod, UnitHarmonicOscillator) {
    const auto traj = integrate(euclidean_metric(2), circular_potential(1.0), {v2(1, 0), v2(0, 0)}, 40.0, 1e-3);
    EXPECT_NEAR(detect_period(traj).period, 2 * pi, 1e-4);
    EXPECT_THROW((void)detect_period(integrate(euclidean_metric(2), circular_potential(1.0), {v2(1, 0), v2(0, 0)},
                                               4.0, 1e-3)),
                 InvalidArgument);
}

TEST(DetectPeriod, SlowLinearModeOfPendulum) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const auto modes = linearized_modes(m, f, v2(0, 0));
    const auto traj = integrate(m, f, {1e-3 * modes[0].direction, v2(0, 0)}, 20.0, 1e-3);
    EXPECT_NEAR(detect_period(traj, 0).period / (2 * pi / 4.1421), 1.0, 1e-2);
    EXPECT_NEAR(detect_period(traj, 1).period / (2 * pi / 4.1421), 1.0, 1e-2);
}

TEST(TurningPoints, HarmonicOscillatorTurnsAtOppositeSide) {
    const auto m = euclidean_metric(2);
    const auto f = circular_potential(1.0);
    const auto traj = integrate(m, f, {v2(1, 0), v2(0, 0)}, 7.0, 1e-3);
    const auto tp = turning_points(m, f, traj);
    ASSERT_GE(tp.size(), 2u);
    EXPECT_NEAR(tp[0].t, pi, 1e-6);
    EXPECT_NEAR(tp[0].q[0], -1.0, 1e-9);
    EXPECT_NEAR(tp[0].kinetic, 0.0, 1e-12);
    EXPECT_NEAR(tp[1].t, 2 * pi, 1e-6);
    const auto curve = extract_mode_curve(m, f, traj);
    EXPECT_NEAR(curve.front()[0], 1.0, 1e-15);
    EXPECT_NEAR(curve.back()[0], -1.0, 1e-9);
}

TEST(VerifyStrictMode, EuclideanAxisLinesAreStrict) {
    const auto m = euclidean_metric(2);
    const auto f = quadratic_potential(Vector{{3.0, 11.0}});
    for (const auto& c : {line(v2(-1, 0), v2(1, 0), 201), line(v2(0, -0.5), v2(0, 0.7), 151)}) {
        const auto r = verify_strict_mode(m, f, c, 1e-10);
        EXPECT_LT(r.max_geodesic_residual, 1e-10);
        EXPECT_LT(r.max_tangency_residual, 1e-10);
        EXPECT_TRUE(r.strict);
    }
}

TEST(VerifyStrictMode, DiagonalLineOfUnequalStiffnessIsNotStrict) {
    const auto r = verify_strict_mode(euclidean_metric(2), quadratic_potential(Vector{{1.0, 4.0}}),
                                      line(v2(-1, -1), v2(1, 1), 201), 1e-6);
    EXPECT_LT(r.max_geodesic_residual, 1e-10);
    EXPECT_GT(r.max_tangency_residual, 1.0);
    EXPECT_FALSE(r.strict);
}

TEST(VerifyStrictMode, ResidualsDoNotDependOnSampling) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const auto a = verify_strict_mode(m, f, line(v2(-0.3, 0.3), v2(0.3, -0.3), 101));
    const auto b = verify_strict_mode(m, f, line(v2(-0.3, 0.3), v2(0.3, -0.3), 1001));
    EXPECT_NEAR(a.max_geodesic_residual, b.max_geodesic_residual, 1e-6 * b.max_geodesic_residual);
    EXPECT_NEAR(a.max_tangency_residual, b.max_tangency_residual, 1e-6 * b.max_tangency_residual);
    for (double r : a.geodesic_residual) {
        EXPECT_GE(r, 0.0);
    }
}

TEST(VerifyStrictMode, GeodesicOfPendulumHasZeroGeodesicResidual) {
    const auto m = double_pendulum_metric();
    const auto c = shoot_geodesic_two_sided(m, v2(0, 0), v2(1, -1), 1.0, 1e-3);
    const auto r = verify_strict_mode(m, circular_potential(100.0), c.points());
    EXPECT_LT(r.max_geodesic_residual, 1e-7);
}

TEST(ScalingInvariance, NonGeodesicLineScalesQuadratically) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const auto res = scaling_invariance_test(m, f, line(v2(-0.5, 0.5), v2(0.5, -0.5), 401), {0.5, 1.0, 2.0});
    ASSERT_EQ(res.size(), 3u);
    EXPECT_TRUE(res[2].ratio_defined);
    EXPECT_NEAR(res[0].normal_acceleration_ratio, 0.25, 1e-6);
    EXPECT_NEAR(res[1].normal_acceleration_ratio, 1.0, 1e-12);
    EXPECT_NEAR(res[2].normal_acceleration_ratio, 4.0, 1e-6);
    // the curve fails the geodesic condition by far more than 0.1, so departure grows with speed
    EXPECT_GT(verify_strict_mode(m, f, line(v2(-0.5, 0.5), v2(0.5, -0.5), 401)).max_geodesic_residual, 0.1);
    EXPECT_GT(res[2].max_deviation, res[0].max_deviation);
}

TEST(ScalingInvariance, StrictLineIsInvariantAndRatioUndefined) {
    const auto m = euclidean_metric(2);
    const auto f = quadratic_potential(Vector{{3.0, 11.0}});
    // long enough to hold the amplitude 2 / sqrt 3 reached at c = 2
    const auto c = line(v2(-3, 0), v2(3, 0), 601);
    ASSERT_TRUE(verify_strict_mode(m, f, c, 1e-6).strict);
    for (const auto& r : scaling_invariance_test(m, f, c, {0.5, 1.0, 2.0})) {
        EXPECT_FALSE(r.ratio_defined);
        EXPECT_EQ(r.normal_acceleration_ratio, 0.0);
        EXPECT_LT(r.max_deviation, 1e-5);
    }
}

TEST(FindMode, NearStrictFamilyGrowsWithEnergy) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const double theta0 = std::atan2(linearized_modes(m, f, v2(0, 0))[1].direction[1],
                                     linearized_modes(m, f, v2(0, 0))[1].direction[0]);
    ModeSearchOptions opt;
    opt.horizon = 10.0;
    double previous = 0.0;
    for (double e : {1.0, 5.0, 20.0}) {
        const auto mode = find_mode(m, f, e, theta0, opt);
        EXPECT_NEAR(f.value(mode.start), -e, 1e-9);
        EXPECT_EQ(mode.trajectory.samples.front().qdot.norm(), 0.0);
        EXPECT_GT(mode.periodicity, 0.9);
        const auto tp = turning_points(m, f, mode.trajectory);
        ASSERT_FALSE(tp.empty());
        const double reach = metric_norm(m, v2(0, 0), tp.front().q);
        EXPECT_GE(reach, previous) << "E = " << e;
        previous = reach;
    }
}

TEST(MetricDistanceToPolyline, EuclideanSegment) {
    const auto c = line(v2(0, 0), v2(1, 0), 11);
    EXPECT_NEAR(metric_distance_to_polyline(euclidean_metric(2), c, v2(0.55, 0.3)), 0.3, 1e-12);
}

TEST(ModeCurveCsv, Header) {
    std::ostringstream os;
    write_mode_curve_csv(os, euclidean_metric(2), line(v2(0, 0), v2(1, 0), 3));
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "s,q1,q2");
}
