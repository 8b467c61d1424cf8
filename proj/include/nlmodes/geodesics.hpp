#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "nlmodes/grid.hpp"
#include "nlmodes/manifold.hpp"

namespace nlmodes {

/// One sample of an arc-length parametrized geodesic: position, unit tangent
/// and coordinate acceleration -Gamma(w, w).
struct GeodesicSample {
    double s = 0.0;
    Vector q;
    Vector w;
    Vector acceleration;
};

/// Uniformly sampled geodesic. Between samples the curve is the quintic
/// Hermite interpolant of (q, w, acceleration), so position is C2 in s.
class GeodesicCurve {
public:
    struct Point {
        Vector q;
        Vector tangent;
        Vector curvature;  // d^2 q / ds^2
    };

    GeodesicCurve() = default;
    GeodesicCurve(std::vector<GeodesicSample> samples, double ds);

    [[nodiscard]] const std::vector<GeodesicSample>& samples() const { return samples_; }
    [[nodiscard]] std::size_t size() const { return samples_.size(); }
    [[nodiscard]] std::size_t dim() const { return samples_.empty() ? 0 : static_cast<std::size_t>(samples_[0].q.size()); }
    [[nodiscard]] double ds() const { return ds_; }
    [[nodiscard]] double s_min() const { return samples_.front().s; }
    [[nodiscard]] double s_max() const { return samples_.back().s; }

    /// Interpolated point; DomainError outside [s_min, s_max].
    [[nodiscard]] Point at(double s) const;
    /// Index of the sample nearest to q in the coordinate norm.
    [[nodiscard]] std::size_t nearest_sample(const Vector& q) const;
    [[nodiscard]] std::vector<Vector> points() const;

private:
    std::vector<GeodesicSample> samples_;
    double ds_ = 0.0;
};

struct ShootOptions {
    /// Rescale the initial velocity to unit g-norm (arc-length samples). When
    /// false the coordinate velocity is used as given and s is its parameter.
    bool normalize_initial_velocity = true;
    /// Largest tolerated | <w,w>_g - <w0,w0>_g | along the curve.
    double unit_speed_tolerance = 1e-6;
};

/// RK4 integration of qddot = -Gamma(qdot, qdot) from (q0, v0) over the
/// given parameter length with step ds.
[[nodiscard]] GeodesicCurve shoot_geodesic(const MetricField& metric, const ChartPoint& q0, const Vector& v0,
                                           double length, double ds, const ShootOptions& options = {});

/// Geodesic through q0 extended by half_length on both sides (s in
/// [-half_length, half_length], s = 0 at q0).
[[nodiscard]] GeodesicCurve shoot_geodesic_two_sided(const MetricField& metric, const ChartPoint& q0,
                                                     const Vector& v0, double half_length, double ds,
                                                     const ShootOptions& options = {});

/// g-norm of the autoparallel defect dw/ds + Gamma(w, w) at every sample,
/// with dw/ds from 5-point differences of the stored tangents. Entries for
/// the two samples at each end are zero (no centred stencil).
[[nodiscard]] std::vector<double> geodesic_residuals(const MetricField& metric, const GeodesicCurve& curve);

/// Geodesic CSV: s,q1..qn,w1..wn.
void write_geodesic_csv(std::ostream& os, const GeodesicCurve& curve);

/// Rectangle in chart coordinates (xi1, xi2).
struct ChartDomain {
    double xi1_min = 0.0;
    double xi1_max = 0.0;
    double halfwidth = 0.0;

    [[nodiscard]] bool contains(const Vector& xi, double slack = 1e-9) const {
        return xi[0] >= xi1_min - slack && xi[0] <= xi1_max + slack && std::abs(xi[1]) <= halfwidth + slack;
    }
};

/// Tubular coordinates around a planar geodesic:
///   h(xi) = gamma(xi1) + xi2 * e_perp(xi1),  e_perp = R dgamma/dxi1,
/// with R the coordinate rotation [[0, -1], [1, 0]]. e_perp is a coordinate
/// (not metric) normal.
class GeodesicChart {
public:
    static constexpr double kDefaultMinDeterminant = 0.1;

    GeodesicChart() = default;
    GeodesicChart(std::shared_ptr<const GeodesicCurve> curve, ChartDomain domain);

    [[nodiscard]] Vector forward(const Vector& xi) const;
    /// dh/dxi = [dgamma/dxi1 + xi2 de_perp/dxi1, e_perp].
    [[nodiscard]] Matrix jacobian(const Vector& xi) const;
    /// Newton solve of h(xi) = q seeded at the nearest geodesic sample.
    /// NumericalError on non-convergence, DomainError if the solution lies
    /// outside the chart domain.
    [[nodiscard]] Vector inverse(const Vector& q) const;

    [[nodiscard]] const ChartDomain& domain() const { return domain_; }
    [[nodiscard]] const GeodesicCurve& geodesic() const { return *curve_; }
    [[nodiscard]] std::shared_ptr<const GeodesicCurve> geodesic_ptr() const { return curve_; }

private:
    std::shared_ptr<const GeodesicCurve> curve_;
    ChartDomain domain_;
};

/// Builds the chart over the whole geodesic with |xi2| <= halfwidth, then
/// trims the xi1 range to the largest interval around xi1 = 0 on which
/// |det J| >= min_determinant. InvalidArgument for n != 2; NumericalError if
/// the Jacobian is degenerate at the origin of the chart.
[[nodiscard]] GeodesicChart geodesic_chart(const GeodesicCurve& curve, double halfwidth,
                                           double min_determinant = GeodesicChart::kDefaultMinDeterminant);

[[nodiscard]] Vector chart_inverse(const GeodesicChart& chart, const ChartPoint& q);

/// Chart lattice CSV: xi1,xi2,q1,q2 at the given resolution.
void write_chart_grid_csv(std::ostream& os, const GeodesicChart& chart, double resolution = 0.1);

/// Speed along a geodesic mode driven by a tangential gradient alpha(s):
/// beta dbeta = alpha ds, integrated as 1/2 beta^2 + c = int_0^s alpha.
/// The integration constant is fixed by the energy, c = -E.
class SpeedLaw {
public:
    SpeedLaw(std::function<double(double)> alpha, double energy, double s_min, double s_max, double ds);

    [[nodiscard]] double constant() const { return c_; }
    [[nodiscard]] double energy() const { return -c_; }
    /// int_0^s alpha
    [[nodiscard]] double work(double s) const;
    /// beta^2 = 2 (int_0^s alpha - c)
    [[nodiscard]] double radicand(double s) const { return 2.0 * (work(s) - c_); }
    /// NaN where the radicand is negative.
    [[nodiscard]] double beta(double s) const;
    [[nodiscard]] const std::optional<double>& turning_point_forward() const { return turn_forward_; }
    [[nodiscard]] const std::optional<double>& turning_point_backward() const { return turn_backward_; }
    [[nodiscard]] double alpha(double s) const { return alpha_(s); }
    /// Time for a full oscillation, 2 int ds / beta between the two turning
    /// points. NumericalError when either turning point is missing.
    [[nodiscard]] double period() const;

private:
    std::function<double(double)> alpha_;
    double c_ = 0.0;
    GridAxis axis_;
    std::vector<double> work_;
    std::vector<double> alpha_nodes_;
    std::optional<double> turn_forward_;
    std::optional<double> turn_backward_;
};

/// InvalidArgument when the radicand is negative at s = 0 (energy < 0).
[[nodiscard]] SpeedLaw speed_law_solve(std::function<double(double)> alpha, double energy, double s_min = -10.0,
                                       double s_max = 10.0, double ds = 1e-3);

}  // namespace nlmodes
