#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nlmodes/dynamics.hpp"
#include "nlmodes/manifold.hpp"
#include "nlmodes/potential.hpp"

namespace nlmodes {

struct LinearMode {
    Vector direction;     // coordinate unit vector, sign fixed so the first nonzero entry is positive
    Vector g_normalized;  // same line, v^T g v = 1
    double omega = 0.0;
};

/// Hessian of f at q by central differences of df (step h), symmetrized.
[[nodiscard]] Matrix potential_hessian(const PotentialField& potential, const ChartPoint& q, double h = 1e-6);

/// Solves -H v = omega^2 g(q*) v at an equilibrium q* of f. Modes are sorted
/// by omega ascending. InvalidArgument if |df(q*)| > 1e-9, NumericalError if
/// -H is not positive definite.
[[nodiscard]] std::vector<LinearMode> linearized_modes(const MetricField& metric, const PotentialField& potential,
                                                       const ChartPoint& qstar);

/// Point on the level set f = -energy along the ray center + r (cos theta,
/// sin theta), r > 0. The ray is marched outward up to max_radius and the
/// crossing refined by TOMS 748 to |f + energy| <= 1e-10.
[[nodiscard]] ChartPoint equipotential_point(const PotentialField& potential, double energy, double theta,
                                             const ChartPoint& center = Vector::Zero(2), double max_radius = 10.0);

/// Autocorrelation score in [0, 1] of a multichannel sequence (rows are time
/// samples). Every channel is standardized over the whole record; channels
/// that are constant are dropped. For each lag L the score is
///   sum_c sum_k x_c[k] x_c[k+L] / sqrt(sum_c sum_k x_c[k]^2 * sum_c sum_k x_c[k+L]^2)
/// over the overlapping window, and the result is its maximum over
/// L in [0.1 N, 0.9 N], clamped at 0.
[[nodiscard]] double periodicity_measure(const Matrix& series);
/// Score of the configuration sequence q(t) of a trajectory; needs >= 1000
/// samples. Velocities are left out: they weight the faster of two mixed
/// modes by its frequency ratio, which buries the optimum during a mode search.
[[nodiscard]] double periodicity_measure(const Trajectory& trajectory);

/// Kinetic-energy minimum of a trajectory located between samples.
struct TurningPoint {
    double t = 0.0;
    Vector q;
    double kinetic = 0.0;
    double potential = 0.0;  // f(q)
};

/// Local minima of the kinetic energy (excluding the first and last sample)
/// refined by quintic Hermite interpolation of the state in time.
[[nodiscard]] std::vector<TurningPoint> turning_points(const MetricField& metric, const PotentialField& potential,
                                                       const Trajectory& trajectory);

/// Configuration points from the start of the trajectory up to its first
/// interior kinetic-energy minimum: for a mode started at rest this is the
/// curve traversed once between its two turning points.
[[nodiscard]] std::vector<Vector> extract_mode_curve(const MetricField& metric, const PotentialField& potential,
                                                     const Trajectory& trajectory);

struct ModeSearchOptions {
    /// length of the reported run
    double horizon = 200.0;
    /// length of every trial run scored during the search
    double search_horizon = 5.0;
    double dt = 5e-4;
    double bracket = 0.4;
    /// evenly spaced trials across the bracket before the golden section; < 3 skips the scan
    std::size_t scan_points = 81;
    double angle_tolerance = 1e-4;
    double energy_drift_tolerance = 1e-6;
    double min_periodicity = 0.5;
    /// half-width of the second search, which minimizes the kinetic energy at
    /// the first turning point around the periodicity optimum; 0 skips it
    double polish_bracket = 0.02;
    double polish_tolerance = 1e-11;
    ChartPoint center = Vector::Zero(2);
};

struct ModeCandidate {
    double energy = 0.0;
    double theta = 0.0;
    ChartPoint start;
    Trajectory trajectory;
    std::vector<Vector> curve;
    /// score of the best trial (search horizon)
    double periodicity = 0.0;
    /// kinetic energy at the first turning point after the start
    double turning_kinetic_energy = 0.0;
    std::size_t evaluations = 0;
};

/// Maximization of periodicity_measure over the start angle theta in
/// [theta0 - bracket, theta0 + bracket]: a coarse scan, then golden section
/// inside the best scan cell. Every trial starts at rest on the level set
/// f = -energy and runs for search_horizon. The winner is refined by the turn
/// polish and simulated again over the full horizon. NumericalError if the
/// best score is below min_periodicity.
[[nodiscard]] ModeCandidate find_mode(const MetricField& metric, const PotentialField& potential, double energy,
                                      double theta0, const ModeSearchOptions& options = {});

/// Curve resampled at uniform g-arc-length with derivatives in s.
struct CurveJet {
    std::vector<double> s;
    std::vector<Vector> q;
    std::vector<Vector> dq;
    std::vector<Vector> ddq;
    [[nodiscard]] std::size_t size() const { return s.size(); }
    [[nodiscard]] double length() const { return s.empty() ? 0.0 : s.back(); }
};

/// Drops repeated points, measures g-arc-length along the polyline, and
/// resamples `count` points (0 picks the input size, within [64, 4000]) by
/// local degree-5 Lagrange interpolation. Derivatives use 7-point stencils.
[[nodiscard]] CurveJet resample_by_arc_length(const MetricField& metric, const std::vector<Vector>& points,
                                              std::size_t count = 0);

struct StrictModeReport {
    std::vector<double> s;
    std::vector<double> geodesic_residual;
    std::vector<double> tangency_residual;
    double max_geodesic_residual = 0.0;
    double max_tangency_residual = 0.0;
    double tolerance = 0.0;
    bool strict = false;
};

/// Per-sample checks of the two strict-mode conditions along a curve:
/// geodesic residual |(q'' + Gamma(q', q'))_perp|_g / |q'|_g^2 (the
/// autoparallel defect of the unit tangent), tangency residual |(grad f)_perp|_g.
[[nodiscard]] StrictModeReport verify_strict_mode(const MetricField& metric, const PotentialField& potential,
                                                  const std::vector<Vector>& curve, double tolerance = 1e-4);

/// Distance from q to a polyline, measured with g(q) on the coordinate offset
/// to the nearest polyline point.
[[nodiscard]] double metric_distance_to_polyline(const MetricField& metric, const std::vector<Vector>& polyline,
                                                 const Vector& q);

struct ScalingOptions {
    double dt = 1e-3;
    double horizon = 3.0;
    double energy_drift_tolerance = 1e-6;
    std::size_t probe_points = 16;
};

struct ScalingResult {
    double scale = 0.0;
    double max_deviation = 0.0;
    /// max_probe |(grad_{cv} cv)_perp|_g at this scale over the same at c = 1
    double normal_acceleration_ratio = 0.0;
    /// false when the unscaled normal acceleration vanishes (< 1e-12); the ratio is then reported as 0
    bool ratio_defined = false;
    double normal_acceleration = 0.0;
};

/// For each c: (i) simulate from the curve midpoint with velocity c times the
/// unit tangent and record the largest g-distance from the curve; (ii) compare
/// the normal covariant acceleration of constant-speed traversal at c against c = 1.
[[nodiscard]] std::vector<ScalingResult> scaling_invariance_test(const MetricField& metric,
                                                                 const PotentialField& potential,
                                                                 const std::vector<Vector>& curve,
                                                                 const std::vector<double>& scales,
                                                                 const ScalingOptions& options = {});

struct PeriodEstimate {
    double period = 0.0;
    double standard_deviation = 0.0;
    std::size_t crossings = 0;
};

/// Times at which qdot[coordinate] changes sign, linearly interpolated
/// between samples, split by direction.
struct VelocityCrossings {
    std::vector<double> rising;
    std::vector<double> falling;
};
[[nodiscard]] VelocityCrossings velocity_zero_crossings(const Trajectory& trajectory, std::size_t coordinate);

/// Mean spacing of same-direction zero crossings of qdot[coordinate], with
/// crossing times refined linearly. InvalidArgument with fewer than 3 crossings.
[[nodiscard]] PeriodEstimate detect_period(const Trajectory& trajectory, std::size_t coordinate = 0);

/// Mode-curve CSV: s,q1..qn with s the g-arc-length along the polyline.
void write_mode_curve_csv(std::ostream& os, const MetricField& metric, const std::vector<Vector>& curve);

}  // namespace nlmodes
