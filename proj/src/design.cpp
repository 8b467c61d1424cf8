#include "nlmodes/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "nlmodes/csv.hpp"
#include "nlmodes/errors.hpp"

namespace nlmodes {

OnGeodesicForce on_geodesic_force(const MetricField& metric, const GeodesicChart& chart,
                                  const std::function<double(double)>& alpha, double spacing,
                                  const std::function<double(double)>& alpha_derivative) {
    const auto& dom = chart.domain();
    OnGeodesicForce out;
    out.xi1 = GridAxis::symmetric_about_zero(dom.xi1_min, dom.xi1_max, spacing);
    if (out.xi1.count < 5) {
        throw InvalidArgument("on_geodesic_force: fewer than 5 nodes along the geodesic");
    }
    auto dalpha = [&](double x) {
        if (alpha_derivative) {
            return alpha_derivative(x);
        }
        const double h = 1e-3;
        return (alpha(x - 2 * h) - 8 * alpha(x - h) + 8 * alpha(x + h) - alpha(x + 2 * h)) / (12 * h);
    };
    out.f1.resize(out.xi1.count);
    out.f2.resize(out.xi1.count);
    out.df2.resize(out.xi1.count);
    for (std::size_t i = 0; i < out.xi1.count; ++i) {
        const double x = out.xi1.at(i);
        const auto p = chart.geodesic().at(x);
        const Matrix g = metric.eval(p.q);
        const auto dg = metric.partials(p.q);
        Vector normal(2);
        normal << -p.tangent[1], p.tangent[0];
        Vector dnormal(2);
        dnormal << -p.curvature[1], p.curvature[0];
        const Vector gt = g * p.tangent;
        const double a = alpha(x);
        const double c = normal.dot(gt);
        // d/dxi1 of <R gamma', gamma'>_g along the curve
        double dc = dnormal.dot(gt) + normal.dot(g * p.curvature);
        for (int k = 0; k < 2; ++k) {
            dc += p.tangent[k] * normal.dot(dg[static_cast<std::size_t>(k)] * p.tangent);
        }
        out.f1[i] = a * p.tangent.dot(gt);
        out.f2[i] = a * c;
        out.df2[i] = dalpha(x) * c + a * dc;
    }
    return out;
}

GeodesicForceField extend_force_field(const OnGeodesicForce& on_geodesic, const Polynomial& beta, double halfwidth) {
    if (!(halfwidth > 0.0)) {
        throw InvalidArgument("extend_force_field: halfwidth must be positive");
    }
    GeodesicForceField field;
    field.xi1 = on_geodesic.xi1;
    field.xi2 = GridAxis::symmetric_about_zero(-halfwidth, halfwidth, on_geodesic.xi1.spacing);
    const auto n1 = static_cast<Eigen::Index>(field.xi1.count);
    const auto n2 = static_cast<Eigen::Index>(field.xi2.count);
    const Polynomial beta_integral = beta.antiderivative();
    field.f1.resize(n1, n2);
    field.f2.resize(n1, n2);
    for (Eigen::Index j = 0; j < n2; ++j) {
        const double x2 = field.xi2.at(static_cast<std::size_t>(j));
        const double lift = beta_integral(x2);
        for (Eigen::Index i = 0; i < n1; ++i) {
            const auto k = static_cast<std::size_t>(i);
            field.f1(i, j) = on_geodesic.f1[k] + x2 * on_geodesic.df2[k];
            field.f2(i, j) = on_geodesic.f2[k] + lift;
        }
    }
    return field;
}

double integrability_residual(const GeodesicForceField& field) {
    const auto n1 = field.f1.rows();
    const auto n2 = field.f1.cols();
    if (n1 < 5 || n2 < 5 || field.f2.rows() != n1 || field.f2.cols() != n2) {
        throw InvalidArgument("integrability_residual: grid too small (need 5 x 5 nodes)");
    }
    const Matrix d1 = differentiate_y(field.f1, field.xi2.spacing);
    const Matrix d2 = differentiate_x(field.f2, field.xi1.spacing);
    return (d1 - d2).block(2, 2, n1 - 4, n2 - 4).cwiseAbs().maxCoeff();
}

BetaBoundReport beta_bound(const GeodesicForceField& field, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw InvalidArgument("beta_bound: epsilon must be positive");
    }
    const Matrix den = differentiate_x(field.f1, field.xi1.spacing);
    const Matrix df2 = differentiate_x(field.f2, field.xi1.spacing);
    const auto z = static_cast<Eigen::Index>(field.xi2.zero_index());
    std::vector<Eigen::Index> window;
    for (std::size_t i = 0; i < field.xi1.count; ++i) {
        if (std::abs(field.xi1.at(i)) <= epsilon + 1e-12) {
            window.push_back(static_cast<Eigen::Index>(i));
        }
    }
    if (window.empty()) {
        throw InvalidArgument("beta_bound: no lattice node within |xi1| <= epsilon");
    }

    BetaBoundReport r;
    r.epsilon = epsilon;
    r.overall = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t jj = 0; jj < field.xi2.count; ++jj) {
        const auto j = static_cast<Eigen::Index>(jj);
        double bound = std::numeric_limits<double>::infinity();
        bool defined = true;
        for (std::size_t w = 0; w < window.size(); ++w) {
            const Eigen::Index i = window[w];
            const double d = den(i, j);
            const bool flips = w + 1 < window.size() && den(window[w + 1], j) * d <= 0.0;
            if (d >= 0.0 || flips) {
                defined = false;
                r.undefined_cells.emplace_back(field.xi1.at(static_cast<std::size_t>(i)), field.xi2.at(jj));
                continue;
            }
            bound = std::min(bound, df2(i, z) * df2(i, z) / d);
        }
        r.xi2.push_back(field.xi2.at(jj));
        r.defined.push_back(defined);
        r.bound.push_back(defined ? bound : std::numeric_limits<double>::quiet_NaN());
        if (defined && !(r.overall <= bound)) {
            r.overall = bound;
        }
    }
    return r;
}

double beta_margin(const BetaBoundReport& report, const Polynomial& beta) {
    double margin = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < report.xi2.size(); ++j) {
        if (!report.defined[j]) {
            continue;
        }
        const double m = report.bound[j] - beta(report.xi2[j]);
        if (!(margin <= m)) {
            margin = m;
        }
    }
    return margin;
}

DesignedPotential::DesignedPotential(GeodesicForceField field, Matrix values, double path_difference)
    : field_(std::move(field)), values_(std::move(values)), path_difference_(path_difference) {
    const Matrix fxy = 0.5 * (differentiate_y(field_.f1, field_.xi2.spacing) +
                              differentiate_x(field_.f2, field_.xi1.spacing));
    interp_ = BicubicHermite(field_.xi1, field_.xi2, values_, field_.f1, field_.f2, fxy);
}

DesignedPotential integrate_potential(const GeodesicForceField& field, double max_residual) {
    const double residual = integrability_residual(field);
    if (!(residual <= max_residual)) {
        throw InvalidArgument("integrate_potential: integrability residual " + format_double(residual) +
                              " exceeds " + format_double(max_residual));
    }
    const auto n1 = field.f1.rows();
    const auto n2 = field.f1.cols();
    const std::size_t z1 = field.xi1.zero_index();
    const std::size_t z2 = field.xi2.zero_index();
    const double h1 = field.xi1.spacing;
    const double h2 = field.xi2.spacing;
    auto column = [](const Matrix& m, Eigen::Index j) {
        std::vector<double> v(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            v[static_cast<std::size_t>(i)] = m(i, j);
        }
        return v;
    };
    auto row = [](const Matrix& m, Eigen::Index i) {
        std::vector<double> v(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            v[static_cast<std::size_t>(j)] = m(i, j);
        }
        return v;
    };

    // along xi1 on the geodesic, then across
    Matrix f(n1, n2);
    const auto along = cumulative_simpson_from(column(field.f1, static_cast<Eigen::Index>(z2)), h1, z1);
    for (Eigen::Index i = 0; i < n1; ++i) {
        const auto across = cumulative_simpson_from(row(field.f2, i), h2, z2);
        for (Eigen::Index j = 0; j < n2; ++j) {
            f(i, j) = along[static_cast<std::size_t>(i)] + across[static_cast<std::size_t>(j)];
        }
    }
    // across first, then along
    double gap = 0.0;
    const auto across0 = cumulative_simpson_from(row(field.f2, static_cast<Eigen::Index>(z1)), h2, z2);
    for (Eigen::Index j = 0; j < n2; ++j) {
        const auto along_j = cumulative_simpson_from(column(field.f1, j), h1, z1);
        for (Eigen::Index i = 0; i < n1; ++i) {
            const double alt = across0[static_cast<std::size_t>(j)] + along_j[static_cast<std::size_t>(i)];
            gap = std::max(gap, std::abs(f(i, j) - alt));
        }
    }
    return DesignedPotential(field, std::move(f), gap);
}

PotentialField designed_potential_in_q(std::shared_ptr<const DesignedPotential> potential,
                                       std::shared_ptr<const GeodesicChart> chart) {
    if (!potential || !chart) {
        throw InvalidArgument("designed_potential_in_q: missing potential or chart");
    }
    auto value = [potential, chart](const Vector& q) { return potential->evaluate(chart->inverse(q)).value; };
    auto differential = [potential, chart](const Vector& q) -> Vector {
        const Vector xi = chart->inverse(q);
        const auto s = potential->evaluate(xi);
        Vector dxi(2);
        dxi << s.dx, s.dy;
        return chart->jacobian(xi).transpose().partialPivLu().solve(dxi);
    };
    return PotentialField(2, std::move(value), std::move(differential), "designed");
}

DefinitenessReport definiteness_check(const PotentialField& potential, const std::vector<Vector>& points, double tol,
                                      const Vector& equilibrium) {
    DefinitenessReport r;
    r.maximizer = equilibrium;
    r.max_value = potential.value(equilibrium);
    r.worst_margin = -std::numeric_limits<double>::infinity();
    for (const Vector& q : points) {
        double f = 0.0;
        try {
            f = potential.value(q);
        } catch (const DomainError&) {
            ++r.skipped;
            continue;
        }
        ++r.samples;
        const double d2 = (q - equilibrium).squaredNorm();
        if (f > r.max_value && d2 > 0.0) {
            r.max_value = f;
            r.maximizer = q;
        }
        if (d2 <= 1e-24) {
            continue;
        }
        const double margin = f + tol * d2;
        if (margin > r.worst_margin) {
            r.worst_margin = margin;
            r.worst_point = q;
        }
    }
    r.pass = r.samples > 0 && r.worst_margin < 0.0 && (r.maximizer - equilibrium).norm() == 0.0;
    return r;
}

std::vector<Vector> chart_lattice_points(const GeodesicChart& chart, double spacing) {
    const auto& d = chart.domain();
    const GridAxis a1 = GridAxis::symmetric_about_zero(d.xi1_min, d.xi1_max, spacing);
    const GridAxis a2 = GridAxis::symmetric_about_zero(-d.halfwidth, d.halfwidth, spacing);
    std::vector<Vector> pts;
    pts.reserve(a1.count * a2.count);
    Vector xi(2);
    for (std::size_t i = 0; i < a1.count; ++i) {
        for (std::size_t j = 0; j < a2.count; ++j) {
            xi << a1.at(i), a2.at(j);
            pts.push_back(chart.forward(xi));
        }
    }
    return pts;
}

DesignedSystem design_system(const MetricField& metric, const DesignInput& input) {
    Vector direction = input.direction;
    if (direction.size() == 0) {
        direction.resize(2);
        direction << std::cos(-std::numbers::pi / 4.0), std::sin(-std::numbers::pi / 4.0);
    }
    ShootOptions shoot;
    shoot.normalize_initial_velocity = input.normalize_direction;
    const GeodesicCurve curve = shoot_geodesic_two_sided(metric, input.origin, direction,
                                                         input.geodesic_half_length, input.geodesic_step, shoot);
    DesignedSystem sys;
    sys.chart = std::make_shared<const GeodesicChart>(geodesic_chart(curve, input.halfwidth, input.min_determinant));
    const Polynomial alpha = input.alpha;
    const Polynomial dalpha = alpha.derivative();
    sys.on_geodesic = on_geodesic_force(
        metric, *sys.chart, [alpha](double x) { return alpha(x); }, input.spacing,
        [dalpha](double x) { return dalpha(x); });
    const GeodesicForceField field = extend_force_field(sys.on_geodesic, input.beta, input.halfwidth);
    sys.integrability = integrability_residual(field);
    const auto& dom = sys.chart->domain();
    const double eps = input.epsilon > 0.0 ? input.epsilon : std::max(-dom.xi1_min, dom.xi1_max);
    sys.bound = beta_bound(field, eps);
    sys.beta_margin = beta_margin(sys.bound, input.beta);
    sys.potential_xi = std::make_shared<const DesignedPotential>(integrate_potential(field));
    sys.potential = designed_potential_in_q(sys.potential_xi, sys.chart);
    return sys;
}

void write_potential_grid_csv(std::ostream& os, const DesignedPotential& potential, const GeodesicChart& chart,
                              std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    os << "xi1,xi2,f,q1,q2\n";
    Vector xi(2);
    for (std::size_t i = 0; i < potential.xi1().count; i += stride) {
        for (std::size_t j = 0; j < potential.xi2().count; j += stride) {
            xi << potential.xi1().at(i), potential.xi2().at(j);
            const Vector q = chart.forward(xi);
            const double row[] = {xi[0], xi[1],
                                  potential.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                                  q[0], q[1]};
            os << csv_row(row) << '\n';
        }
    }
}

void write_force_field_csv(std::ostream& os, const GeodesicForceField& field, std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    os << "xi1,xi2,F1,F2\n";
    for (std::size_t i = 0; i < field.xi1.count; i += stride) {
        for (std::size_t j = 0; j < field.xi2.count; j += stride) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            const double row[] = {field.xi1.at(i), field.xi2.at(j), field.f1(ii, jj), field.f2(ii, jj)};
            os << csv_row(row) << '\n';
        }
    }
}

}  // namespace nlmodes
