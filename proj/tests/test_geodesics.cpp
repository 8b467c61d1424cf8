#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nlmodes/dynamics.hpp"
#include "nlmodes/errors.hpp"
#include "nlmodes/geodesics.hpp"

using namespace nlmodes;
using std::numbers::pi;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }

double chord_deviation(const GeodesicCurve& c) {
    const Vector a = c.samples().front().q;
    const Vector b = c.samples().back().q;
    const double span = c.s_max() - c.s_min();
    double worst = 0.0;
    for (const auto& s : c.samples()) {
        const double u = (s.s - c.s_min()) / span;
        worst = std::max(worst, (s.q - (a + u * (b - a))).norm());
    }
    return worst;
}

GeodesicCurve design_geodesic() {
    return shoot_geodesic_two_sided(double_pendulum_metric(), v2(0, 0), v2(std::cos(-pi / 4), std::sin(-pi / 4)), 1.75,
                                    1e-3);
}

}  // namespace

TEST(ShootGeodesic, EuclideanStraightSegment) {
    const auto c = shoot_geodesic(euclidean_metric(2), v2(0, 0), v2(1, 0), 2.0, 1e-3);
    EXPECT_LT((c.samples().back().q - v2(2, 0)).norm(), 1e-12);
    EXPECT_LT(chord_deviation(c), 1e-12);
}

TEST(ShootGeodesic, ConstantMetricsGiveAffineCurves) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 5; ++k) {
        Matrix l(2, 2);
        l << 1.0 + std::abs(u(rng)), 0.0, u(rng), 0.5 + std::abs(u(rng));
        const auto m = constant_metric(l * l.transpose());
        const auto c = shoot_geodesic(m, v2(u(rng), u(rng)), v2(u(rng), u(rng)), 2.0, 1e-3);
        EXPECT_LT(chord_deviation(c), 1e-10);
    }
}

TEST(ShootGeodesic, UnitSpeedAndZeroResidualOnPendulum) {
    const auto m = double_pendulum_metric();
    const auto c = design_geodesic();
    for (const auto& s : c.samples()) {
        EXPECT_NEAR(inner_product(m, s.q, s.w, s.w), 1.0, 1e-8);
    }
    for (double r : geodesic_residuals(m, c)) {
        EXPECT_LE(r, 1e-8);
    }
}

TEST(ShootGeodesic, DesignGeodesicBendsAwayFromStraightLine) {
    const auto c = design_geodesic();
    EXPECT_GT(chord_deviation(c), 1e-2);
    EXPECT_DOUBLE_EQ(c.s_min(), -1.75);
    EXPECT_DOUBLE_EQ(c.s_max(), 1.75);
    EXPECT_EQ(c.at(0.0).q, v2(0, 0));
}

TEST(ShootGeodesic, ReversedShotRetracesCurve) {
    const auto m = double_pendulum_metric();
    const auto fwd = shoot_geodesic(m, v2(0.2, -0.1), v2(0.6, -0.8), 1.0, 1e-3);
    const auto& end = fwd.samples().back();
    const auto back = shoot_geodesic(m, end.q, -end.w, 1.0, 1e-3);
    EXPECT_LT((back.samples().back().q - v2(0.2, -0.1)).norm(), 1e-10);
}

TEST(ShootGeodesic, InterpolationMatchesFinerShot) {
    const auto m = double_pendulum_metric();
    const auto coarse = shoot_geodesic(m, v2(0, 0), v2(1, -1), 1.0, 1e-2);
    const auto fine = shoot_geodesic(m, v2(0, 0), v2(1, -1), 1.0, 1e-4);
    for (double s : {0.0123, 0.5055, 0.9871}) {
        EXPECT_LT((coarse.at(s).q - fine.at(s).q).norm(), 1e-9);
        EXPECT_LT((coarse.at(s).tangent - fine.at(s).tangent).norm(), 1e-8);
    }
    EXPECT_THROW((void)coarse.at(1.5), DomainError);
}

TEST(ShootGeodesic, RejectsZeroVelocity) {
    EXPECT_THROW((void)shoot_geodesic(double_pendulum_metric(), v2(0, 0), v2(0, 0), 1.0, 1e-3), InvalidArgument);
}

TEST(GeodesicChart, IdentityChartForEuclideanAxis) {
    const auto c = shoot_geodesic_two_sided(euclidean_metric(2), v2(0, 0), v2(1, 0), 1.0, 1e-3);
    const auto chart = geodesic_chart(c, 0.5);
    for (const Vector& q : {v2(0.3, 0.2), v2(-0.9, -0.45), v2(0, 0)}) {
        EXPECT_LT((chart_inverse(chart, q) - q).norm(), 1e-12);
        EXPECT_LT((chart.forward(q) - q).norm(), 1e-12);
    }
}

TEST(GeodesicChart, OnGeodesicPointsMapToArcLength) {
    const auto c = design_geodesic();
    const auto chart = geodesic_chart(c, 0.3);
    for (double s : {-1.2, -0.4, 0.0, 0.77, 1.3}) {
        const Vector xi = chart_inverse(chart, c.at(s).q);
        EXPECT_NEAR(xi[0], s, 1e-9);
        EXPECT_NEAR(xi[1], 0.0, 1e-9);
    }
}

TEST(GeodesicChart, RoundTripOnRandomPoints) {
    const auto chart = geodesic_chart(design_geodesic(), 0.3);
    const auto& d = chart.domain();
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u1(d.xi1_min, d.xi1_max), u2(-d.halfwidth, d.halfwidth);
    for (int k = 0; k < 200; ++k) {
        const Vector xi = v2(u1(rng), u2(rng));
        EXPECT_LT((chart_inverse(chart, chart.forward(xi)) - xi).norm(), 1e-8);
    }
}

TEST(GeodesicChart, JacobianAtOriginAndPushforward) {
    const auto c = design_geodesic();
    const auto chart = geodesic_chart(c, 0.3);
    const Matrix j = chart.jacobian(v2(0, 0));
    const Vector t = c.at(0.0).tangent;
    EXPECT_NEAR(j.determinant(), t.squaredNorm(), 1e-12);
    EXPECT_GE(std::abs(j.determinant()), GeodesicChart::kDefaultMinDeterminant);
    for (double s : {-0.8, 0.0, 1.1}) {
        EXPECT_LT((chart.jacobian(v2(s, 0)) * v2(1, 0) - c.at(s).tangent).norm(), 1e-14);
        EXPECT_LT((chart.jacobian(v2(s, 0)) * v2(0, 1) - v2(-c.at(s).tangent[1], c.at(s).tangent[0])).norm(), 1e-14);
    }
}

TEST(GeodesicChart, JacobianMatchesFiniteDifferences) {
    const auto chart = geodesic_chart(design_geodesic(), 0.3);
    const double h = 1e-6;
    for (const Vector& xi : {v2(0.5, 0.2), v2(-1.0, -0.25), v2(1.4, 0.1)}) {
        Matrix fd(2, 2);
        fd.col(0) = (chart.forward(xi + v2(h, 0)) - chart.forward(xi - v2(h, 0))) / (2 * h);
        fd.col(1) = (chart.forward(xi + v2(0, h)) - chart.forward(xi - v2(0, h))) / (2 * h);
        EXPECT_LT((chart.jacobian(xi) - fd).cwiseAbs().maxCoeff(), 1e-7);
    }
}

TEST(GeodesicChart, OutsideDomainIsRejected) {
    const auto chart = geodesic_chart(design_geodesic(), 0.3);
    EXPECT_THROW((void)chart_inverse(chart, chart.forward(v2(0.0, 0.0)) + v2(2.0, 2.0)), Error);
}

TEST(SpeedLaw, FreeMotionHasUnitSpeed) {
    const auto law = speed_law_solve([](double) { return 0.0; }, 0.5, -2.0, 2.0);
    for (double s : {-1.9, -0.5, 0.0, 1.3}) {
        EXPECT_NEAR(law.beta(s), 1.0, 1e-12);
    }
    EXPECT_FALSE(law.turning_point_forward().has_value());
    EXPECT_THROW((void)law.period(), NumericalError);
}

TEST(SpeedLaw, LinearAlphaClosedForm) {
    const double e = 5.63;
    const auto law = speed_law_solve([](double s) { return -5.0 * s; }, e, -3.0, 3.0);
    EXPECT_DOUBLE_EQ(law.constant(), -e);
    for (double s : {-1.4, -0.3, 0.0, 0.9, 1.5}) {
        EXPECT_NEAR(law.beta(s), std::sqrt(2 * e - 5 * s * s), 1e-9);
        EXPECT_NEAR(0.5 * law.beta(s) * law.beta(s), law.work(s) - law.constant(), 1e-12);
    }
    ASSERT_TRUE(law.turning_point_forward().has_value());
    ASSERT_TRUE(law.turning_point_backward().has_value());
    EXPECT_NEAR(*law.turning_point_forward(), std::sqrt(11.26 / 5.0), 1e-9);
    EXPECT_NEAR(*law.turning_point_forward(), 1.5006, 1e-4);
    EXPECT_NEAR(*law.turning_point_backward(), -std::sqrt(11.26 / 5.0), 1e-9);
    EXPECT_TRUE(std::isnan(law.beta(1.6)));
    EXPECT_NEAR(law.period(), 2 * pi / std::sqrt(5.0), 1e-8);
}

TEST(SpeedLaw, NegativeEnergyIsRejected) {
    EXPECT_THROW((void)speed_law_solve([](double s) { return -s; }, -1.0), InvalidArgument);
}

TEST(GeodesicCsv, Header) {
    std::ostringstream os;
    write_geodesic_csv(os, shoot_geodesic(euclidean_metric(2), v2(0, 0), v2(1, 0), 0.01, 1e-3));
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "s,q1,q2,w1,w2");
    std::ostringstream grid;
    write_chart_grid_csv(grid, geodesic_chart(design_geodesic(), 0.3));
    EXPECT_EQ(grid.str().substr(0, grid.str().find('\n')), "xi1,xi2,q1,q2");
}
