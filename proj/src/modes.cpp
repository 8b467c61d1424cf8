#include "nlmodes/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>

#include <boost/math/tools/roots.hpp>
#include <fftw3.h>

#include "nlmodes/csv.hpp"
#include "nlmodes/errors.hpp"

namespace nlmodes {

namespace {

// fftw's planner is not re-entrant; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

double kinetic_energy(const MetricField& metric, const State& s) {
    return 0.5 * s.qdot.dot(metric.eval(s.q) * s.qdot);
}

std::size_t window_start(std::size_t centre, std::size_t width, std::size_t total) {
    if (total <= width) {
        return 0;
    }
    const std::size_t half = width / 2;
    const std::size_t lo = centre >= half ? centre - half : 0;
    return std::min(lo, total - width);
}

Vector normal_part(const MetricField& metric, const Vector& q, const Vector& x, const Vector& tangent) {
    return tangential_normal_split(metric, q, x, tangent).normal;
}

}  // namespace

Matrix potential_hessian(const PotentialField& potential, const ChartPoint& q, double h) {
    const auto n = q.size();
    Matrix hess(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Vector qp = q;
        Vector qm = q;
        qp[j] += h;
        qm[j] -= h;
        hess.col(j) = (potential.differential(qp) - potential.differential(qm)) / (2.0 * h);
    }
    return 0.5 * (hess + hess.transpose());
}

std::vector<LinearMode> linearized_modes(const MetricField& metric, const PotentialField& potential,
                                         const ChartPoint& qstar) {
    const Vector df = potential.differential(qstar);
    if (df.norm() > 1e-9) {
        throw InvalidArgument("linearized_modes: not an equilibrium, |df| = " + format_double(df.norm()));
    }
    const Matrix stiffness = -potential_hessian(potential, qstar);
    const Matrix g = metric.eval(qstar);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(stiffness, g);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("linearized_modes: eigen solver failed");
    }
    const Vector& lambda = solver.eigenvalues();
    if (lambda.minCoeff() <= 0.0) {
        throw NumericalError("linearized_modes: indefinite Hessian (f is not negative definite at the equilibrium)");
    }
    std::vector<LinearMode> modes;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        Vector v = solver.eigenvectors().col(i);
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            if (std::abs(v[k]) > 1e-12) {
                if (v[k] < 0.0) {
                    v = -v;
                }
                break;
            }
        }
        modes.push_back(LinearMode{v.normalized(), v, std::sqrt(lambda[i])});
    }
    return modes;
}

ChartPoint equipotential_point(const PotentialField& potential, double energy, double theta, const ChartPoint& center,
                               double max_radius) {
    if (potential.dim() != 2 || center.size() != 2) {
        throw InvalidArgument("equipotential_point: defined for two-dimensional configuration spaces");
    }
    if (!(energy > 0.0)) {
        throw InvalidArgument("equipotential_point: energy must be positive");
    }
    Vector u(2);
    u << std::cos(theta), std::sin(theta);
    auto level = [&](double r) -> double { return potential.value(center + r * u) + energy; };
    if (!(level(0.0) > 0.0)) {
        throw InvalidArgument("equipotential_point: f(center) is already below -energy");
    }
    double lo = 0.0;
    double hi = 1e-3;
    try {
        while (level(hi) > 0.0) {
            lo = hi;
            hi *= 1.5;
            if (hi > max_radius) {
                throw NumericalError("equipotential_point: level set not reached within radius " +
                                     format_double(max_radius));
            }
        }
    } catch (const DomainError& e) {
        throw NumericalError(std::string("equipotential_point: level set not reached inside the potential's domain (") +
                             e.what() + ")");
    }
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(level, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    const double best = std::abs(level(r.first)) <= std::abs(level(r.second)) ? r.first : r.second;
    const double residual = std::abs(level(best));
    if (residual > 1e-10) {
        throw NumericalError("equipotential_point: root residual " + format_double(residual));
    }
    return center + best * u;
}

double periodicity_measure(const Matrix& series) {
    const auto n = static_cast<std::size_t>(series.rows());
    if (n < 10) {
        throw InvalidArgument("periodicity_measure: sequence too short");
    }
    std::vector<Vector> channels;
    for (Eigen::Index c = 0; c < series.cols(); ++c) {
        Vector x = series.col(c);
        const double mean = x.mean();
        x.array() -= mean;
        const double sd = std::sqrt(x.squaredNorm() / static_cast<double>(n));
        if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
            continue;
        }
        channels.push_back(x / sd);
    }
    if (channels.empty()) {
        throw InvalidArgument("periodicity_measure: degenerate (constant) trajectory");
    }

    std::size_t m = 1;
    while (m < 2 * n) {
        m <<= 1;
    }
    double* buf = fftw_alloc_real(m);
    fftw_complex* spec = fftw_alloc_complex(m / 2 + 1);
    fftw_plan forward;
    fftw_plan backward;
    {
        std::lock_guard lock(fftw_planner_mutex());
        forward = fftw_plan_dft_r2c_1d(static_cast<int>(m), buf, spec, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec, buf, FFTW_ESTIMATE);
    }
    std::vector<double> acf(n, 0.0);
    std::vector<double> prefix(n + 1, 0.0);
    for (const Vector& x : channels) {
        std::fill(buf, buf + m, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            buf[k] = x[static_cast<Eigen::Index>(k)];
        }
        fftw_execute(forward);
        for (std::size_t k = 0; k <= m / 2; ++k) {
            spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
            spec[k][1] = 0.0;
        }
        fftw_execute(backward);
        for (std::size_t k = 0; k < n; ++k) {
            acf[k] += buf[k] / static_cast<double>(m);
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double v = x[static_cast<Eigen::Index>(k)];
            prefix[k + 1] += v * v;
        }
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    fftw_free(buf);
    fftw_free(spec);
    for (std::size_t k = 0; k < n; ++k) {
        prefix[k + 1] += prefix[k];
    }

    const auto lag_lo = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n)));
    const auto lag_hi = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(n)));
    double best = 0.0;
    for (std::size_t lag = std::max<std::size_t>(lag_lo, 1); lag <= lag_hi; ++lag) {
        const double ea = prefix[n - lag];
        const double eb = prefix[n] - prefix[lag];
        if (ea <= 0.0 || eb <= 0.0) {
            continue;
        }
        best = std::max(best, acf[lag] / std::sqrt(ea * eb));
    }
    return std::clamp(best, 0.0, 1.0);
}

double periodicity_measure(const Trajectory& trajectory) {
    if (trajectory.size() < 1000) {
        throw InvalidArgument("periodicity_measure: need at least 1000 samples");
    }
    const auto d = static_cast<Eigen::Index>(trajectory.dim());
    Matrix series(static_cast<Eigen::Index>(trajectory.size()), d);
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        series.row(static_cast<Eigen::Index>(k)) = trajectory.samples[k].q.transpose();
    }
    return periodicity_measure(series);
}

std::vector<TurningPoint> turning_points(const MetricField& metric, const PotentialField& potential,
                                         const Trajectory& trajectory) {
    const auto& smp = trajectory.samples;
    std::vector<TurningPoint> out;
    if (smp.size() < 3) {
        return out;
    }
    std::vector<double> kinetic(smp.size());
    for (std::size_t k = 0; k < smp.size(); ++k) {
        kinetic[k] = kinetic_energy(metric, smp[k]);
    }
    for (std::size_t k = 1; k + 1 < smp.size(); ++k) {
        if (!(kinetic[k] <= kinetic[k - 1] && kinetic[k] < kinetic[k + 1])) {
            continue;
        }
        const Vector acc[3] = {equations_of_motion(metric, potential, smp[k - 1]),
                               equations_of_motion(metric, potential, smp[k]),
                               equations_of_motion(metric, potential, smp[k + 1])};
        const double t0 = smp[k - 1].t;
        const double t2 = smp[k + 1].t;
        auto interpolate = [&](double t) {
            const std::size_t i = t < smp[k].t ? 0 : 1;
            const State& a = smp[k - 1 + i];
            const State& b = smp[k + i];
            const auto h = quintic_hermite(a.q, a.qdot, acc[i], b.q, b.qdot, acc[i + 1], b.t - a.t, t - a.t);
            return State{h.value, h.first, t};
        };
        const auto opt = golden_section_maximize([&](double t) { return -kinetic_energy(metric, interpolate(t)); },
                                                 t0, t2, 1e-10 * (t2 - t0));
        const State s = interpolate(opt.x);
        out.push_back(TurningPoint{opt.x, s.q, -opt.value, potential.value(s.q)});
    }
    return out;
}

std::vector<Vector> extract_mode_curve(const MetricField& metric, const PotentialField& potential,
                                       const Trajectory& trajectory) {
    const auto& smp = trajectory.samples;
    double previous = smp.empty() ? 0.0 : kinetic_energy(metric, smp[0]);
    double current = smp.size() > 1 ? kinetic_energy(metric, smp[1]) : 0.0;
    for (std::size_t k = 1; k + 1 < smp.size(); ++k) {
        const double next = kinetic_energy(metric, smp[k + 1]);
        if (current <= previous && current < next) {
            Trajectory window;
            window.dt = trajectory.dt;
            window.samples.assign(smp.begin() + static_cast<std::ptrdiff_t>(k - 1),
                                  smp.begin() + static_cast<std::ptrdiff_t>(k + 2));
            const auto turn = turning_points(metric, potential, window);
            std::vector<Vector> curve;
            for (std::size_t i = 0; i <= k && smp[i].t < turn.front().t; ++i) {
                curve.push_back(smp[i].q);
            }
            curve.push_back(turn.front().q);
            return curve;
        }
        previous = current;
        current = next;
    }
    throw NumericalError("extract_mode_curve: no turning point within the simulated horizon");
}

ModeCandidate find_mode(const MetricField& metric, const PotentialField& potential, double energy, double theta0,
                        const ModeSearchOptions& options) {
    const IntegrationOptions integration{options.energy_drift_tolerance};
    auto simulate = [&](double theta, double horizon) {
        const ChartPoint start = equipotential_point(potential, energy, theta, options.center);
        const State s0{start, Vector::Zero(start.size()), 0.0};
        return integrate(metric, potential, s0, horizon, options.dt, integration);
    };
    auto score = [&](double theta) { return periodicity_measure(simulate(theta, options.search_horizon)); };
    double lo = theta0 - options.bracket;
    double hi = theta0 + options.bracket;
    std::size_t scanned = 0;
    if (options.scan_points >= 3) {
        // the score has side humps around a narrow peak; golden section only
        // runs inside the best cell of a coarse scan
        const double step = (hi - lo) / static_cast<double>(options.scan_points - 1);
        double best = -1.0;
        double best_theta = theta0;
        for (std::size_t i = 0; i < options.scan_points; ++i) {
            const double theta = lo + step * static_cast<double>(i);
            const double value = score(theta);
            if (value > best) {
                best = value;
                best_theta = theta;
            }
        }
        scanned = options.scan_points;
        lo = std::max(lo, best_theta - step);
        hi = std::min(hi, best_theta + step);
    }
    auto opt = golden_section_maximize(score, lo, hi, options.angle_tolerance);
    opt.evaluations += scanned;
    if (!(opt.value >= options.min_periodicity)) {
        throw NumericalError("find_mode: no candidate above periodicity " + format_double(options.min_periodicity) +
                             " in the bracket (best " + format_double(opt.value) + ")");
    }
    double theta = opt.x;
    std::size_t evaluations = opt.evaluations + 1;
    if (options.polish_bracket > 0.0) {
        // a periodic orbit started at rest comes to rest again; drive the
        // kinetic energy at the first turn to zero around the winner
        auto turn_kinetic = [&](double th) {
            const auto turns = turning_points(metric, potential, simulate(th, options.search_horizon));
            return turns.empty() ? std::numeric_limits<double>::infinity() : turns.front().kinetic;
        };
        const auto polish = golden_section_maximize([&](double th) { return -turn_kinetic(th); },
                                                    theta - options.polish_bracket, theta + options.polish_bracket,
                                                    options.polish_tolerance);
        if (-polish.value <= turn_kinetic(theta)) {
            theta = polish.x;
        }
        evaluations += polish.evaluations + 1;
    }
    ModeCandidate c;
    c.energy = energy;
    c.theta = theta;
    c.trajectory = simulate(theta, options.horizon);
    c.start = c.trajectory.samples.front().q;
    c.periodicity = opt.value;
    c.curve = extract_mode_curve(metric, potential, c.trajectory);
    const auto turns = turning_points(metric, potential, c.trajectory);
    c.turning_kinetic_energy = turns.empty() ? std::numeric_limits<double>::quiet_NaN() : turns.front().kinetic;
    c.evaluations = evaluations;
    return c;
}

CurveJet resample_by_arc_length(const MetricField& metric, const std::vector<Vector>& points, std::size_t count) {
    std::vector<Vector> pts;
    for (const auto& p : points) {
        if (!p.allFinite()) {
            throw InvalidArgument("resample_by_arc_length: non-finite curve point");
        }
        if (pts.empty() || (p - pts.back()).norm() > 1e-12 * (1.0 + p.norm())) {
            pts.push_back(p);
        }
    }
    if (pts.size() < 5) {
        throw InvalidArgument("resample_by_arc_length: curve too short (need >= 5 distinct points)");
    }
    std::vector<double> s(pts.size(), 0.0);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const Vector mid = 0.5 * (pts[k] + pts[k - 1]);
        s[k] = s[k - 1] + metric_norm(metric, mid, pts[k] - pts[k - 1]);
    }
    const double length = s.back();
    if (count == 0) {
        count = std::clamp<std::size_t>(points.size(), 64, 4000);
    }
    count = std::max<std::size_t>(count, 7);
    const double h = length / static_cast<double>(count - 1);

    // Thin clustered input (slow passages near turning points) so the
    // interpolation nodes stay roughly evenly spread.
    std::vector<std::size_t> keep{0};
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
        if (s[k] - s[keep.back()] >= 0.5 * h) {
            keep.push_back(k);
        }
    }
    if (s.back() - s[keep.back()] < 0.5 * h && keep.size() > 1) {
        keep.pop_back();
    }
    keep.push_back(pts.size() - 1);
    if (keep.size() < 5) {
        throw InvalidArgument("resample_by_arc_length: curve too short after thinning");
    }
    std::vector<double> node_s(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        node_s[i] = s[keep[i]];
    }

    CurveJet jet;
    jet.s.resize(count);
    jet.q.resize(count);
    const std::size_t interp_width = std::min<std::size_t>(6, keep.size());
    for (std::size_t j = 0; j < count; ++j) {
        const double sj = j + 1 == count ? length : h * static_cast<double>(j);
        jet.s[j] = sj;
        const auto it = std::upper_bound(node_s.begin(), node_s.end(), sj);
        const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - node_s.begin() - 1));
        const std::size_t lo = window_start(idx + 1, interp_width, keep.size());
        const std::span<const double> nodes(node_s.data() + lo, interp_width);
        const auto w = fd_weights(sj, nodes, 0);
        // Weights sum to one: interpolate offsets from a local base point.
        const Vector& base = pts[keep[lo]];
        Vector q = Vector::Zero(pts[0].size());
        for (std::size_t i = 1; i < interp_width; ++i) {
            q += w[i] * (pts[keep[lo + i]] - base);
        }
        jet.q[j] = base + q;
    }
    jet.dq.resize(count);
    jet.ddq.resize(count);
    constexpr std::size_t stencil = 7;
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t lo = window_start(j, stencil, count);
        const std::span<const double> nodes(jet.s.data() + lo, stencil);
        const auto w1 = fd_weights(jet.s[j], nodes, 1);
        const auto w2 = fd_weights(jet.s[j], nodes, 2);
        Vector d1 = Vector::Zero(pts[0].size());
        Vector d2 = Vector::Zero(pts[0].size());
        for (std::size_t i = 0; i < stencil; ++i) {
            const Vector offset = jet.q[lo + i] - jet.q[j];
            d1 += w1[i] * offset;
            d2 += w2[i] * offset;
        }
        jet.dq[j] = d1;
        jet.ddq[j] = d2;
    }
    return jet;
}

StrictModeReport verify_strict_mode(const MetricField& metric, const PotentialField& potential,
                                    const std::vector<Vector>& curve, double tolerance) {
    if (!(tolerance > 0.0)) {
        throw InvalidArgument("verify_strict_mode: tolerance must be positive");
    }
    const CurveJet jet = resample_by_arc_length(metric, curve);
    StrictModeReport report;
    report.tolerance = tolerance;
    report.s = jet.s;
    for (std::size_t j = 0; j < jet.size(); ++j) {
        const Vector& q = jet.q[j];
        const Vector& v = jet.dq[j];
        const Vector defect = covariant_acceleration(metric, q, v, jet.ddq[j]);
        const double speed2 = inner_product(metric, q, v, v);
        const double geo = metric_norm(metric, q, normal_part(metric, q, defect, v)) / speed2;
        const Vector grad = contravariant_gradient(metric, potential, q);
        const double tan = metric_norm(metric, q, normal_part(metric, q, grad, v));
        report.geodesic_residual.push_back(geo);
        report.tangency_residual.push_back(tan);
        report.max_geodesic_residual = std::max(report.max_geodesic_residual, geo);
        report.max_tangency_residual = std::max(report.max_tangency_residual, tan);
    }
    report.strict = report.max_geodesic_residual <= tolerance && report.max_tangency_residual <= tolerance;
    return report;
}

double metric_distance_to_polyline(const MetricField& metric, const std::vector<Vector>& polyline, const Vector& q) {
    if (polyline.empty()) {
        throw InvalidArgument("metric_distance_to_polyline: empty polyline");
    }
    const Matrix g = metric.eval(q);
    double best = (q - polyline[0]).dot(g * (q - polyline[0]));
    for (std::size_t k = 1; k < polyline.size(); ++k) {
        const Vector d = polyline[k] - polyline[k - 1];
        const Vector gd = g * d;
        const double dd = d.dot(gd);
        const Vector r = q - polyline[k - 1];
        const double t = dd > 0.0 ? std::clamp(r.dot(gd) / dd, 0.0, 1.0) : 0.0;
        const Vector off = r - t * d;
        best = std::min(best, off.dot(g * off));
    }
    return std::sqrt(best);
}

std::vector<ScalingResult> scaling_invariance_test(const MetricField& metric, const PotentialField& potential,
                                                   const std::vector<Vector>& curve, const std::vector<double>& scales,
                                                   const ScalingOptions& options) {
    for (double c : scales) {
        if (!(c > 0.0)) {
            throw InvalidArgument("scaling_invariance_test: scales must be positive");
        }
    }
    const CurveJet jet = resample_by_arc_length(metric, curve);
    const std::size_t n = jet.size();
    const std::size_t probes = std::max<std::size_t>(1, options.probe_points);
    std::vector<std::size_t> probe_idx;
    for (std::size_t p = 0; p < probes; ++p) {
        const double frac = (static_cast<double>(p) + 0.5) / static_cast<double>(probes);
        probe_idx.push_back(3 + static_cast<std::size_t>(frac * static_cast<double>(n - 7)));
    }
    auto normal_acceleration = [&](double c) {
        double worst = 0.0;
        for (std::size_t j : probe_idx) {
            const Vector v = c * jet.dq[j];
            const Vector a = (c * c) * jet.ddq[j];
            const Vector cov = covariant_acceleration(metric, jet.q[j], v, a);
            worst = std::max(worst, metric_norm(metric, jet.q[j], normal_part(metric, jet.q[j], cov, v)));
        }
        return worst;
    };
    const double base = normal_acceleration(1.0);
    const bool defined = base >= 1e-12;

    const std::size_t mid = n / 2;
    const Vector q0 = jet.q[mid];
    const Vector w = jet.dq[mid] / metric_norm(metric, q0, jet.dq[mid]);
    const IntegrationOptions integration{options.energy_drift_tolerance};

    std::vector<ScalingResult> out;
    for (double c : scales) {
        ScalingResult r;
        r.scale = c;
        r.normal_acceleration = normal_acceleration(c);
        r.ratio_defined = defined;
        r.normal_acceleration_ratio = defined ? r.normal_acceleration / base : 0.0;
        const Trajectory traj = integrate(metric, potential, State{q0, c * w, 0.0}, options.horizon, options.dt,
                                          integration);
        for (const State& s : traj.samples) {
            r.max_deviation = std::max(r.max_deviation, metric_distance_to_polyline(metric, jet.q, s.q));
        }
        out.push_back(r);
    }
    return out;
}

VelocityCrossings velocity_zero_crossings(const Trajectory& trajectory, std::size_t coordinate) {
    if (trajectory.empty() || coordinate >= trajectory.dim()) {
        throw InvalidArgument("velocity_zero_crossings: coordinate out of range");
    }
    const auto c = static_cast<Eigen::Index>(coordinate);
    VelocityCrossings out;
    const auto& smp = trajectory.samples;
    for (std::size_t k = 0; k + 1 < smp.size(); ++k) {
        const double a = smp[k].qdot[c];
        const double b = smp[k + 1].qdot[c];
        const bool rising = a < 0.0 && b >= 0.0;
        const bool falling = a > 0.0 && b <= 0.0;
        if (rising || falling) {
            const double t = smp[k].t + (smp[k + 1].t - smp[k].t) * a / (a - b);
            (rising ? out.rising : out.falling).push_back(t);
        }
    }
    return out;
}

PeriodEstimate detect_period(const Trajectory& trajectory, std::size_t coordinate) {
    if (trajectory.empty() || coordinate >= trajectory.dim()) {
        throw InvalidArgument("detect_period: coordinate out of range");
    }
    const auto crossings = velocity_zero_crossings(trajectory, coordinate);
    const auto& up = crossings.rising;
    const auto& down = crossings.falling;
    if (up.size() + down.size() < 3) {
        throw InvalidArgument("detect_period: too few velocity zero crossings");
    }
    const auto& times = up.size() >= down.size() ? up : down;
    std::vector<double> periods;
    for (std::size_t k = 1; k < times.size(); ++k) {
        periods.push_back(times[k] - times[k - 1]);
    }
    double mean = 0.0;
    for (double p : periods) {
        mean += p;
    }
    mean /= static_cast<double>(periods.size());
    double var = 0.0;
    for (double p : periods) {
        var += (p - mean) * (p - mean);
    }
    var /= static_cast<double>(periods.size());
    return PeriodEstimate{mean, std::sqrt(var), up.size() + down.size()};
}

void write_mode_curve_csv(std::ostream& os, const MetricField& metric, const std::vector<Vector>& curve) {
    const std::size_t n = curve.empty() ? 0 : static_cast<std::size_t>(curve[0].size());
    os << 's';
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",q" << i;
    }
    os << '\n';
    double s = 0.0;
    std::vector<double> row(n + 1);
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (k > 0) {
            s += metric_norm(metric, 0.5 * (curve[k] + curve[k - 1]), curve[k] - curve[k - 1]);
        }
        row[0] = s;
        for (std::size_t i = 0; i < n; ++i) {
            row[i + 1] = curve[k][static_cast<Eigen::Index>(i)];
        }
        os << csv_row(row) << '\n';
    }
}

}  // namespace nlmodes
