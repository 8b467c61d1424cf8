#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <vector>

#include "nlmodes/manifold.hpp"
#include "nlmodes/potential.hpp"

namespace nlmodes {

/// Configuration, coordinate velocity and time.
struct State {
    Vector q;
    Vector qdot;
    double t = 0.0;
};

/// Time-ordered states of one run with the total energy of every sample.
struct Trajectory {
    std::vector<State> samples;
    std::vector<double> energies;
    double dt = 0.0;

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] bool empty() const { return samples.empty(); }
    [[nodiscard]] std::size_t dim() const { return samples.empty() ? 0 : static_cast<std::size_t>(samples[0].q.size()); }
    /// max_k |E_k - E_0| / max(|E_0|, 1)
    [[nodiscard]] double max_relative_energy_drift() const;
};

struct IntegrationOptions {
    /// Relative drift |E(t) - E(0)| / max(|E(0)|, 1) above which the run
    /// aborts with ToleranceError. Infinity disables the check.
    double energy_drift_tolerance = 1e-6;
};

/// Coordinate acceleration of grad_qdot qdot = grad f:
/// qddot^i = -Gamma^i_jk qdot^j qdot^k + g^ij d_j f.
[[nodiscard]] Vector equations_of_motion(const MetricField& metric, const PotentialField& potential, const State& s);

/// E = 1/2 <qdot, qdot>_g - f(q). The minus sign pairs with the +grad f drive.
[[nodiscard]] double total_energy(const MetricField& metric, const PotentialField& potential, const State& s);

/// Fixed-step classical Runge-Kutta (order 4) on the first-order system.
/// Samples are taken every dt for floor(horizon / dt) steps; horizon = 0
/// returns the initial state alone.
[[nodiscard]] Trajectory integrate(const MetricField& metric, const PotentialField& potential, const State& s0,
                                   double horizon, double dt, const IntegrationOptions& options = {});

/// One RK4 step of size dt.
[[nodiscard]] State rk4_step(const MetricField& metric, const PotentialField& potential, const State& s, double dt);

/// CSV with header t,q1..qn,qd1..qdn,E and 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

// Built-in systems.

/// Planar double pendulum with unit masses and lengths, q1 absolute angle of
/// the first link, q2 relative angle:
/// g11 = 3 + 2 cos q2, g12 = 1 + cos q2, g22 = 1.
[[nodiscard]] MetricField double_pendulum_metric();

/// f(q) = -1/2 k0 |q|^2 (a torsion spring of stiffness k0 on every joint).
[[nodiscard]] PotentialField circular_potential(double k0, std::size_t dim = 2);

/// f(q) = -1/2 sum_i k_i q_i^2.
[[nodiscard]] PotentialField quadratic_potential(const Vector& stiffness);

/// f(q) = c.
[[nodiscard]] PotentialField constant_potential(std::size_t dim, double c = 0.0);

}  // namespace nlmodes
