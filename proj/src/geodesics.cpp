#include "nlmodes/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/math/tools/roots.hpp>

#include "nlmodes/csv.hpp"
#include "nlmodes/errors.hpp"

namespace nlmodes {

namespace {

Vector rotate_quarter(const Vector& v) {
    Vector r(2);
    r << -v[1], v[0];
    return r;
}

}  // namespace

GeodesicCurve::GeodesicCurve(std::vector<GeodesicSample> samples, double ds) : samples_(std::move(samples)), ds_(ds) {
    if (samples_.size() < 2 || !(ds_ > 0.0)) {
        throw InvalidArgument("GeodesicCurve: need >= 2 samples and positive spacing");
    }
}

GeodesicCurve::Point GeodesicCurve::at(double s) const {
    const double slack = 1e-9 * ds_;
    if (s < s_min() - slack || s > s_max() + slack) {
        throw DomainError("GeodesicCurve: s = " + format_double(s) + " outside [" + format_double(s_min()) + ", " +
                          format_double(s_max()) + "]");
    }
    const double t = (s - s_min()) / ds_;
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
    i = std::min(i, samples_.size() - 2);
    const GeodesicSample& a = samples_[i];
    const GeodesicSample& b = samples_[i + 1];
    const auto h = quintic_hermite(a.q, a.w, a.acceleration, b.q, b.w, b.acceleration, ds_, s - a.s);
    return Point{h.value, h.first, h.second};
}

std::size_t GeodesicCurve::nearest_sample(const Vector& q) const {
    constexpr std::size_t stride = 16;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples_.size(); i += stride) {
        const double d = (samples_[i].q - q).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    const std::size_t lo = best >= stride ? best - stride : 0;
    const std::size_t hi = std::min(samples_.size() - 1, best + stride);
    for (std::size_t i = lo; i <= hi; ++i) {
        const double d = (samples_[i].q - q).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<Vector> GeodesicCurve::points() const {
    std::vector<Vector> pts;
    pts.reserve(samples_.size());
    for (const auto& s : samples_) {
        pts.push_back(s.q);
    }
    return pts;
}

GeodesicCurve shoot_geodesic(const MetricField& metric, const ChartPoint& q0, const Vector& v0, double length,
                             double ds, const ShootOptions& options) {
    if (!(ds > 0.0) || !(length > 0.0)) {
        throw InvalidArgument("shoot_geodesic: need positive length and step");
    }
    if (q0.size() != v0.size() || static_cast<std::size_t>(q0.size()) != metric.dim()) {
        throw InvalidArgument("shoot_geodesic: dimension mismatch");
    }
    const double n0 = metric_norm(metric, q0, v0);
    if (!(n0 > 0.0)) {
        throw InvalidArgument("shoot_geodesic: zero initial velocity");
    }
    Vector w = options.normalize_initial_velocity ? Vector(v0 / n0) : v0;
    const double speed0 = inner_product(metric, q0, w, w);

    const auto steps = static_cast<std::size_t>(std::ceil(length / ds - 1e-9));
    const double h = length / static_cast<double>(steps);
    auto accel = [&metric](const Vector& q, const Vector& v) -> Vector { return -christoffel_quadratic(metric, q, v); };

    std::vector<GeodesicSample> samples;
    samples.reserve(steps + 1);
    Vector q = q0;
    samples.push_back(GeodesicSample{0.0, q, w, accel(q, w)});
    for (std::size_t k = 1; k <= steps; ++k) {
        const Vector& a1 = samples.back().acceleration;
        const Vector q2 = q + 0.5 * h * w;
        const Vector w2 = w + 0.5 * h * a1;
        const Vector a2 = accel(q2, w2);
        const Vector q3 = q + 0.5 * h * w2;
        const Vector w3 = w + 0.5 * h * a2;
        const Vector a3 = accel(q3, w3);
        const Vector q4 = q + h * w3;
        const Vector w4 = w + h * a3;
        const Vector a4 = accel(q4, w4);
        q = q + (h / 6.0) * (w + 2.0 * w2 + 2.0 * w3 + w4);
        w = w + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        if (!q.allFinite() || !w.allFinite()) {
            throw NumericalError("shoot_geodesic: residual blow-up (non-finite state)");
        }
        const double speed = inner_product(metric, q, w, w);
        if (std::abs(speed - speed0) > options.unit_speed_tolerance) {
            throw ToleranceError("shoot_geodesic: speed invariant violated by " + format_double(speed - speed0) +
                                 " at s = " + format_double(static_cast<double>(k) * h));
        }
        samples.push_back(GeodesicSample{static_cast<double>(k) * h, q, w, accel(q, w)});
    }
    return GeodesicCurve(std::move(samples), h);
}

GeodesicCurve shoot_geodesic_two_sided(const MetricField& metric, const ChartPoint& q0, const Vector& v0,
                                       double half_length, double ds, const ShootOptions& options) {
    const GeodesicCurve fwd = shoot_geodesic(metric, q0, v0, half_length, ds, options);
    const GeodesicCurve bwd = shoot_geodesic(metric, q0, -v0, half_length, ds, options);
    std::vector<GeodesicSample> samples;
    samples.reserve(fwd.size() + bwd.size() - 1);
    for (auto it = bwd.samples().rbegin(); it != bwd.samples().rend() - 1; ++it) {
        samples.push_back(GeodesicSample{-it->s, it->q, -it->w, it->acceleration});
    }
    for (const auto& s : fwd.samples()) {
        samples.push_back(s);
    }
    return GeodesicCurve(std::move(samples), fwd.ds());
}

std::vector<double> geodesic_residuals(const MetricField& metric, const GeodesicCurve& curve) {
    const auto& s = curve.samples();
    std::vector<double> out(s.size(), 0.0);
    const double h = curve.ds();
    for (std::size_t k = 2; k + 2 < s.size(); ++k) {
        const Vector dw = (s[k - 2].w - 8.0 * s[k - 1].w + 8.0 * s[k + 1].w - s[k + 2].w) / (12.0 * h);
        const Vector defect = covariant_acceleration(metric, s[k].q, s[k].w, dw);
        out[k] = metric_norm(metric, s[k].q, defect);
    }
    return out;
}

void write_geodesic_csv(std::ostream& os, const GeodesicCurve& curve) {
    const std::size_t n = curve.dim();
    os << 's';
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",q" << i;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",w" << i;
    }
    os << '\n';
    std::vector<double> row(2 * n + 1);
    for (const auto& smp : curve.samples()) {
        row[0] = smp.s;
        for (std::size_t i = 0; i < n; ++i) {
            row[1 + i] = smp.q[static_cast<Eigen::Index>(i)];
            row[1 + n + i] = smp.w[static_cast<Eigen::Index>(i)];
        }
        os << csv_row(row) << '\n';
    }
}

GeodesicChart::GeodesicChart(std::shared_ptr<const GeodesicCurve> curve, ChartDomain domain)
    : curve_(std::move(curve)), domain_(domain) {
    if (!curve_ || curve_->dim() != 2) {
        throw InvalidArgument("GeodesicChart: tubular charts exist for n = 2 only");
    }
    if (!(domain_.halfwidth > 0.0) || !(domain_.xi1_max > domain_.xi1_min)) {
        throw InvalidArgument("GeodesicChart: empty domain");
    }
}

Vector GeodesicChart::forward(const Vector& xi) const {
    const auto p = curve_->at(xi[0]);
    return p.q + xi[1] * rotate_quarter(p.tangent);
}

Matrix GeodesicChart::jacobian(const Vector& xi) const {
    const auto p = curve_->at(xi[0]);
    Matrix j(2, 2);
    j.col(0) = p.tangent + xi[1] * rotate_quarter(p.curvature);
    j.col(1) = rotate_quarter(p.tangent);
    return j;
}

Vector GeodesicChart::inverse(const Vector& q) const {
    if (q.size() != 2 || !q.allFinite()) {
        throw InvalidArgument("chart_inverse: need a finite point in R^2");
    }
    const auto& seed = curve_->samples()[curve_->nearest_sample(q)];
    const Vector normal = rotate_quarter(seed.w);
    Vector xi(2);
    xi << seed.s, (q - seed.q).dot(normal) / normal.squaredNorm();

    constexpr int kMaxIterations = 50;
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxIterations; ++it) {
        const Vector r = forward(xi) - q;
        residual = r.cwiseAbs().maxCoeff();
        if (residual <= 1e-14) {
            break;
        }
        const Vector step = jacobian(xi).partialPivLu().solve(r);
        xi -= step;
        xi[0] = std::clamp(xi[0], curve_->s_min(), curve_->s_max());
        if (!xi.allFinite()) {
            throw NumericalError("chart_inverse: Newton iteration diverged");
        }
        if (step.cwiseAbs().maxCoeff() <= 1e-15) {
            residual = (forward(xi) - q).cwiseAbs().maxCoeff();
            break;
        }
    }
    if (!(residual <= 1e-10)) {
        throw NumericalError("chart_inverse: no convergence in 50 iterations (residual " + format_double(residual) +
                             ")");
    }
    if (!domain_.contains(xi)) {
        throw DomainError("chart_inverse: point maps to xi = (" + format_double(xi[0]) + ", " + format_double(xi[1]) +
                          "), outside the chart domain");
    }
    return xi;
}

GeodesicChart geodesic_chart(const GeodesicCurve& curve, double halfwidth, double min_determinant) {
    if (curve.dim() != 2) {
        throw InvalidArgument("geodesic_chart: tubular charts exist for n = 2 only");
    }
    if (!(halfwidth > 0.0)) {
        throw InvalidArgument("geodesic_chart: halfwidth must be positive");
    }
    if (!(curve.s_min() <= 0.0 && curve.s_max() >= 0.0)) {
        throw InvalidArgument("geodesic_chart: the geodesic must contain s = 0");
    }
    // det J is affine in xi2, so checking both edges of the strip covers it.
    auto admissible = [&](const GeodesicSample& smp) {
        const Vector n = rotate_quarter(smp.w);
        Matrix j(2, 2);
        j.col(1) = n;
        bool ok = true;
        double sign = 0.0;
        for (double x2 : {-halfwidth, halfwidth}) {
            j.col(0) = smp.w + x2 * rotate_quarter(smp.acceleration);
            const double d = j.determinant();
            ok = ok && std::abs(d) >= min_determinant && (sign == 0.0 || d * sign > 0.0);
            sign = d;
        }
        return ok;
    };
    const auto& s = curve.samples();
    std::size_t zero = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::abs(s[i].s) < std::abs(s[zero].s)) {
            zero = i;
        }
    }
    if (!admissible(s[zero])) {
        throw NumericalError("geodesic_chart: Jacobian degenerate at the chart origin for the requested halfwidth");
    }
    std::size_t lo = zero;
    std::size_t hi = zero;
    while (lo > 0 && admissible(s[lo - 1])) {
        --lo;
    }
    while (hi + 1 < s.size() && admissible(s[hi + 1])) {
        ++hi;
    }
    if (hi == lo) {
        throw NumericalError("geodesic_chart: Jacobian degenerate on the requested domain");
    }
    auto ptr = std::make_shared<const GeodesicCurve>(curve);
    return GeodesicChart(std::move(ptr), ChartDomain{s[lo].s, s[hi].s, halfwidth});
}

Vector chart_inverse(const GeodesicChart& chart, const ChartPoint& q) { return chart.inverse(q); }

void write_chart_grid_csv(std::ostream& os, const GeodesicChart& chart, double resolution) {
    const auto& d = chart.domain();
    const GridAxis a1 = GridAxis::symmetric_about_zero(d.xi1_min, d.xi1_max, resolution);
    const GridAxis a2 = GridAxis::symmetric_about_zero(-d.halfwidth, d.halfwidth, resolution);
    os << "xi1,xi2,q1,q2\n";
    Vector xi(2);
    for (std::size_t i = 0; i < a1.count; ++i) {
        for (std::size_t j = 0; j < a2.count; ++j) {
            xi << a1.at(i), a2.at(j);
            const Vector q = chart.forward(xi);
            const double row[] = {xi[0], xi[1], q[0], q[1]};
            os << csv_row(row) << '\n';
        }
    }
}

SpeedLaw::SpeedLaw(std::function<double(double)> alpha, double energy, double s_min, double s_max, double ds)
    : alpha_(std::move(alpha)), c_(-energy) {
    if (!alpha_) {
        throw InvalidArgument("speed_law: alpha must be set");
    }
    if (!(s_min <= 0.0 && s_max >= 0.0)) {
        throw InvalidArgument("speed_law: arc-length range must contain 0");
    }
    if (!(energy >= 0.0)) {
        throw InvalidArgument("speed_law: negative radicand at s = 0 (energy " + format_double(energy) + " < 0)");
    }
    axis_ = GridAxis::symmetric_about_zero(s_min, s_max, ds);
    const std::size_t n = axis_.count;
    const std::size_t z = axis_.zero_index();
    alpha_nodes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        alpha_nodes_[i] = alpha_(axis_.at(i));
    }
    work_ = cumulative_simpson_from(alpha_nodes_, ds, z);

    auto locate_root = [this](double a, double b) {
        auto f = [this](double s) { return radicand(s); };
        boost::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(f, a, b, boost::math::tools::eps_tolerance<double>(50), iters);
        return 0.5 * (r.first + r.second);
    };
    if (radicand(0.0) <= 0.0) {
        turn_forward_ = 0.0;
        turn_backward_ = 0.0;
        return;
    }
    for (std::size_t i = z + 1; i < n; ++i) {
        if (radicand(axis_.at(i)) <= 0.0) {
            turn_forward_ = locate_root(axis_.at(i - 1), axis_.at(i));
            break;
        }
    }
    for (std::size_t k = 1; k <= z; ++k) {
        if (radicand(axis_.at(z - k)) <= 0.0) {
            turn_backward_ = locate_root(axis_.at(z - k), axis_.at(z - k + 1));
            break;
        }
    }
}

double SpeedLaw::work(double s) const {
    if (!axis_.contains(s)) {
        throw DomainError("speed_law: s = " + format_double(s) + " outside the tabulated range");
    }
    const double t = (s - axis_.origin) / axis_.spacing;
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
    i = std::min(i, axis_.count - 2);
    const double h = axis_.spacing;
    const double u = t - static_cast<double>(i);
    const double u2 = u * u;
    const double u3 = u2 * u;
    // cubic Hermite with alpha as the derivative of the work
    return (2 * u3 - 3 * u2 + 1) * work_[i] + (u3 - 2 * u2 + u) * h * alpha_nodes_[i] +
           (-2 * u3 + 3 * u2) * work_[i + 1] + (u3 - u2) * h * alpha_nodes_[i + 1];
}

double SpeedLaw::beta(double s) const {
    const double r = radicand(s);
    return r >= 0.0 ? std::sqrt(r) : std::numeric_limits<double>::quiet_NaN();
}

double SpeedLaw::period() const {
    if (!turn_forward_ || !turn_backward_) {
        throw NumericalError("speed_law: the motion does not turn on both sides inside the tabulated range");
    }
    // s = c + r sin(phi) turns the inverse-square-root end singularities
    // into a smooth integrand
    const double c = 0.5 * (*turn_forward_ + *turn_backward_);
    const double r = 0.5 * (*turn_forward_ - *turn_backward_);
    constexpr int n = 4000;
    const double dphi = std::numbers::pi / n;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double phi = -0.5 * std::numbers::pi + (k + 0.5) * dphi;
        const double b = beta(c + r * std::sin(phi));
        if (!(b > 0.0)) {
            throw NumericalError("speed_law: speed vanishes between the turning points");
        }
        sum += r * std::cos(phi) / b;
    }
    return 2.0 * sum * dphi;
}

SpeedLaw speed_law_solve(std::function<double(double)> alpha, double energy, double s_min, double s_max, double ds) {
    return SpeedLaw(std::move(alpha), energy, s_min, s_max, ds);
}

}  // namespace nlmodes
