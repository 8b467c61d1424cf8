#include "nlmodes/dynamics.hpp"

#include <cmath>
#include <ostream>

#include "nlmodes/csv.hpp"
#include "nlmodes/errors.hpp"

namespace nlmodes {

double Trajectory::max_relative_energy_drift() const {
    if (energies.empty()) {
        return 0.0;
    }
    const double scale = std::max(std::abs(energies.front()), 1.0);
    double worst = 0.0;
    for (double e : energies) {
        worst = std::max(worst, std::abs(e - energies.front()) / scale);
    }
    return worst;
}

Vector equations_of_motion(const MetricField& metric, const PotentialField& potential, const State& s) {
    if (s.q.size() != s.qdot.size() || static_cast<std::size_t>(s.q.size()) != metric.dim()) {
        throw InvalidArgument("equations_of_motion: state dimension mismatch");
    }
    const Matrix g = metric.eval(s.q);
    const auto dg = metric.partials(s.q);
    const Vector df = potential.differential(s.q);
    if (!df.allFinite()) {
        throw NumericalError("equations_of_motion: non-finite potential gradient");
    }
    // g qddot = df - (sum_j v^j d_j g) v + 1/2 v^T (d_l g) v
    const auto n = g.rows();
    const Vector& v = s.qdot;
    Vector rhs = df;
    Matrix directional = Matrix::Zero(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
        const Matrix& d = dg[static_cast<std::size_t>(l)];
        directional += v[l] * d;
        rhs[l] += 0.5 * v.dot(d * v);
    }
    rhs -= directional * v;
    Eigen::LLT<Matrix> llt(g);
    return llt.solve(rhs);
}

double total_energy(const MetricField& metric, const PotentialField& potential, const State& s) {
    return 0.5 * s.qdot.dot(metric.eval(s.q) * s.qdot) - potential.value(s.q);
}

State rk4_step(const MetricField& metric, const PotentialField& potential, const State& s, double dt) {
    const double h2 = 0.5 * dt;
    const Vector a1 = equations_of_motion(metric, potential, s);
    const State s2{s.q + h2 * s.qdot, s.qdot + h2 * a1, s.t + h2};
    const Vector a2 = equations_of_motion(metric, potential, s2);
    const State s3{s.q + h2 * s2.qdot, s.qdot + h2 * a2, s.t + h2};
    const Vector a3 = equations_of_motion(metric, potential, s3);
    const State s4{s.q + dt * s3.qdot, s.qdot + dt * a3, s.t + dt};
    const Vector a4 = equations_of_motion(metric, potential, s4);
    State next;
    next.q = s.q + (dt / 6.0) * (s.qdot + 2.0 * s2.qdot + 2.0 * s3.qdot + s4.qdot);
    next.qdot = s.qdot + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    next.t = s.t + dt;
    return next;
}

Trajectory integrate(const MetricField& metric, const PotentialField& potential, const State& s0, double horizon,
                     double dt, const IntegrationOptions& options) {
    if (!(dt > 0.0) || !(horizon >= 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("integrate: need dt > 0 and finite horizon >= 0");
    }
    if (!s0.q.allFinite() || !s0.qdot.allFinite() || s0.q.size() != s0.qdot.size()) {
        throw InvalidArgument("integrate: initial state malformed or non-finite");
    }
    const auto steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
    Trajectory traj;
    traj.dt = dt;
    traj.samples.reserve(steps + 1);
    traj.energies.reserve(steps + 1);
    traj.samples.push_back(s0);
    const double e0 = total_energy(metric, potential, s0);
    traj.energies.push_back(e0);
    const double scale = std::max(std::abs(e0), 1.0);

    State s = s0;
    for (std::size_t k = 1; k <= steps; ++k) {
        s = rk4_step(metric, potential, s, dt);
        s.t = s0.t + static_cast<double>(k) * dt;
        if (!s.q.allFinite() || !s.qdot.allFinite()) {
            throw NumericalError("integrate: non-finite state at t = " + format_double(s.t));
        }
        const double e = total_energy(metric, potential, s);
        const double drift = std::abs(e - e0) / scale;
        if (!(drift <= options.energy_drift_tolerance)) {
            throw ToleranceError("integrate: relative energy drift " + format_double(drift) + " exceeds " +
                                 format_double(options.energy_drift_tolerance) + " at t = " + format_double(s.t));
        }
        traj.samples.push_back(s);
        traj.energies.push_back(e);
    }
    return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    const std::size_t n = trajectory.dim();
    os << 't';
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",q" << i;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",qd" << i;
    }
    os << ",E\n";
    std::vector<double> row(2 * n + 2);
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        const State& s = trajectory.samples[k];
        row[0] = s.t;
        for (std::size_t i = 0; i < n; ++i) {
            row[1 + i] = s.q[static_cast<Eigen::Index>(i)];
            row[1 + n + i] = s.qdot[static_cast<Eigen::Index>(i)];
        }
        row[2 * n + 1] = trajectory.energies[k];
        os << csv_row(row) << '\n';
    }
}

MetricField double_pendulum_metric() {
    auto eval = [](const Vector& q) {
        const double c = std::cos(q[1]);
        Matrix g(2, 2);
        g << 3.0 + 2.0 * c, 1.0 + c, 1.0 + c, 1.0;
        return g;
    };
    auto partials = [](const Vector& q) {
        const double s = std::sin(q[1]);
        Matrix d2(2, 2);
        d2 << -2.0 * s, -s, -s, 0.0;
        return std::vector<Matrix>{Matrix::Zero(2, 2), d2};
    };
    return MetricField(2, std::move(eval), std::move(partials), "double_pendulum");
}

PotentialField circular_potential(double k0, std::size_t dim) {
    if (!(k0 > 0.0)) {
        throw InvalidArgument("circular_potential: stiffness must be positive");
    }
    return PotentialField(
        dim, [k0](const Vector& q) { return -0.5 * k0 * q.squaredNorm(); },
        [k0](const Vector& q) -> Vector { return -k0 * q; }, "circular");
}

PotentialField quadratic_potential(const Vector& stiffness) {
    return PotentialField(
        static_cast<std::size_t>(stiffness.size()),
        [stiffness](const Vector& q) { return -0.5 * q.dot(stiffness.cwiseProduct(q)); },
        [stiffness](const Vector& q) -> Vector { return -stiffness.cwiseProduct(q); }, "quadratic");
}

PotentialField constant_potential(std::size_t dim, double c) {
    const auto n = static_cast<Eigen::Index>(dim);
    return PotentialField(
        dim, [c](const Vector&) { return c; }, [n](const Vector&) -> Vector { return Vector::Zero(n); },
        "constant");
}

}  // namespace nlmodes
