#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nlmodes/dynamics.hpp"
#include "nlmodes/errors.hpp"

using namespace nlmodes;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }

State march(const MetricField& m, const PotentialField& f, State s, double dt, int steps) {
    for (int i = 0; i < steps; ++i) {
        s = rk4_step(m, f, s, dt);
    }
    return s;
}

}  // namespace

TEST(EquationsOfMotion, EquilibriumHasNoAcceleration) {
    const auto m = double_pendulum_metric();
    EXPECT_LT(equations_of_motion(m, constant_potential(2, -1.0), {v2(0.4, 0.2), v2(0, 0)}).norm(), 1e-12);
}

TEST(EquationsOfMotion, AtRestAccelerationIsGradient) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const Vector a = equations_of_motion(m, f, {v2(0.1, 0.0), v2(0, 0)});
    EXPECT_NEAR(a[0], -10.0, 1e-12);
    EXPECT_NEAR(a[1], 20.0, 1e-12);
    const Vector q = v2(-0.3, 1.2);
    EXPECT_LT((equations_of_motion(m, f, {q, v2(0, 0)}) - contravariant_gradient(m, f, q)).norm(), 1e-14);
}

TEST(EquationsOfMotion, EuclideanReducesToDifferential) {
    const auto f = quadratic_potential(Vector{{3.0, 8.0}});
    const Vector q = v2(0.5, -0.25);
    EXPECT_EQ(equations_of_motion(euclidean_metric(2), f, {q, v2(7, -3)}), f.differential(q));
}

TEST(TotalEnergy, SpecValues) {
    EXPECT_EQ(total_energy(double_pendulum_metric(), circular_potential(100.0), {v2(0, 0), v2(0, 0)}), 0.0);
    EXPECT_DOUBLE_EQ(total_energy(euclidean_metric(2), constant_potential(2), {v2(1, 1), v2(3, 4)}), 12.5);
    EXPECT_DOUBLE_EQ(total_energy(double_pendulum_metric(), constant_potential(2), {v2(0, 0), v2(1, 0)}), 2.5);
    EXPECT_NEAR(circular_potential(100.0).value(v2(0.1, 0.0)), -0.5, 1e-15);
}

TEST(Integrate, HarmonicOscillatorFollowsCosine) {
    const auto traj = integrate(euclidean_metric(2), circular_potential(1.0), {v2(1, 0), v2(0, 0)}, 10.0, 1e-3);
    ASSERT_EQ(traj.size(), 10001u);
    double worst = 0.0;
    for (const auto& s : traj.samples) {
        worst = std::max(worst, std::abs(s.q[0] - std::cos(s.t)));
        EXPECT_EQ(s.q[1], 0.0);
    }
    EXPECT_LT(worst, 1e-6);
    EXPECT_NEAR(traj.samples.back().t, 10.0, 1e-9);
}

TEST(Integrate, ZeroHorizonReturnsInitialState) {
    const State s0{v2(0.2, 0.1), v2(-1, 1)};
    const auto traj = integrate(double_pendulum_metric(), circular_potential(100.0), s0, 0.0, 1e-3);
    ASSERT_EQ(traj.size(), 1u);
    EXPECT_EQ(traj.samples[0].q, s0.q);
    EXPECT_EQ(traj.samples[0].qdot, s0.qdot);
}

TEST(Integrate, TimesStrictlyIncrease) {
    const auto traj = integrate(double_pendulum_metric(), circular_potential(100.0), {v2(0.3, 0), v2(0, 0)}, 1.0, 1e-3);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        EXPECT_GT(traj.samples[i].t, traj.samples[i - 1].t);
    }
}

TEST(Integrate, DriftAboveToleranceThrows) {
    IntegrationOptions opt;
    opt.energy_drift_tolerance = 1e-6;
    EXPECT_THROW((void)integrate(double_pendulum_metric(), circular_potential(100.0), {v2(0.5, -0.5), v2(3, 3)}, 2.0,
                                 0.05, opt),
                 ToleranceError);
}

TEST(Integrate, NonFiniteStateIsAnError) {
    const State bad{v2(std::numeric_limits<double>::quiet_NaN(), 0), v2(0, 0)};
    EXPECT_THROW((void)integrate(euclidean_metric(2), circular_potential(1.0), bad, 1.0, 1e-3), Error);
}

TEST(Integrate, EnergyIsConservedForRandomStarts) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 3; ++k) {
        State s0{v2(0.5 * u(rng), 0.5 * u(rng)), v2(2 * u(rng), 2 * u(rng))};
        ASSERT_LE(total_energy(m, f, s0), 60.0);
        IntegrationOptions opt;
        opt.energy_drift_tolerance = std::numeric_limits<double>::infinity();
        const auto traj = integrate(m, f, s0, 20.0, 1e-3, opt);
        EXPECT_LT(traj.max_relative_energy_drift(), 1e-6);
    }
}

TEST(Integrate, TimeReversalReturnsToStart) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const State s0{v2(0.3, -0.2), v2(1.0, 0.5)};
    const State mid = march(m, f, s0, 1e-3, 3000);
    const State back = march(m, f, {mid.q, -mid.qdot, 0.0}, 1e-3, 3000);
    EXPECT_LT((back.q - s0.q).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LT((back.qdot + s0.qdot).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Integrate, FourthOrderConvergence) {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const State s0{v2(0.4, 0.3), v2(0.0, 0.0)};
    const double dt = 2e-3;
    const int steps = 500;
    const State ref = march(m, f, s0, dt / 16, steps * 16);
    auto err = [&](const State& s) {
        Vector d(4);
        d << s.q - ref.q, s.qdot - ref.qdot;
        return d.norm();
    };
    const double coarse = err(march(m, f, s0, dt, steps));
    const double fine = err(march(m, f, s0, dt / 2, steps * 2));
    const double factor = coarse / fine;
    EXPECT_GE(factor, 12.0);
    EXPECT_LE(factor, 20.0);
}

TEST(TrajectoryCsv, HeaderAndPrecision) {
    const auto traj = integrate(euclidean_metric(2), circular_potential(1.0), {v2(1, 0), v2(0, 0)}, 1e-3, 1e-3);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,q1,q2,qd1,qd2,E");
    std::getline(is, line);
    EXPECT_EQ(line.substr(0, 2), "0,");
    int rows = 1;
    while (std::getline(is, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 2);
}
