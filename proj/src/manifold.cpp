#include "nlmodes/manifold.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "nlmodes/errors.hpp"

namespace nlmodes {

namespace {

std::string format_point(const Vector& q) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        os << (i ? ", " : "") << q[i];
    }
    os << ')';
    return os.str();
}

void require_same_dim(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) {
        throw InvalidArgument(std::string(what) + ": dimension mismatch");
    }
}

Eigen::LLT<Matrix> factor(const MetricField& metric, const Vector& q) {
    Eigen::LLT<Matrix> llt(metric.eval(q));
    return llt;
}

}  // namespace

MetricField::MetricField(std::size_t dim, EvalFn eval, PartialsFn partials, std::string name)
    : dim_(dim), eval_(std::move(eval)), partials_(std::move(partials)), name_(std::move(name)) {
    if (dim_ == 0 || !eval_) {
        throw InvalidArgument("MetricField: dimension must be >= 1 and eval must be set");
    }
}

void MetricField::check_dim(const Vector& q) const {
    if (static_cast<std::size_t>(q.size()) != dim_) {
        throw InvalidArgument("MetricField: point has dimension " + std::to_string(q.size()) + ", expected " +
                              std::to_string(dim_));
    }
    if (!q.allFinite()) {
        throw NumericalError("MetricField: non-finite point " + format_point(q));
    }
}

Matrix MetricField::raw(const Vector& q) const {
    check_dim(q);
    return eval_(q);
}

Matrix MetricField::eval(const Vector& q) const {
    Matrix g = raw(q);
    const auto n = static_cast<Eigen::Index>(dim_);
    if (g.rows() != n || g.cols() != n || !g.allFinite()) {
        throw NumericalError("invalid metric at point " + format_point(q) + ": malformed or non-finite components");
    }
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw NumericalError("invalid metric at point " + format_point(q) + ": not symmetric");
    }
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("invalid metric at point " + format_point(q) + ": not positive definite");
    }
    return g;
}

std::vector<Matrix> MetricField::finite_difference_partials(const Vector& q, double h) const {
    check_dim(q);
    std::vector<Matrix> d;
    d.reserve(dim_);
    Vector qp = q;
    Vector qm = q;
    for (std::size_t k = 0; k < dim_; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        qp[ki] = q[ki] + h;
        qm[ki] = q[ki] - h;
        d.push_back((eval_(qp) - eval_(qm)) / (2.0 * h));
        qp[ki] = q[ki];
        qm[ki] = q[ki];
    }
    return d;
}

std::vector<Matrix> MetricField::partials(const Vector& q) const {
    if (partials_) {
        check_dim(q);
        return partials_(q);
    }
    return finite_difference_partials(q);
}

Vector ChristoffelSymbols::contract(const Vector& u, const Vector& v) const {
    Vector out(static_cast<Eigen::Index>(gamma.size()));
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = u.dot(gamma[i] * v);
    }
    return out;
}

Matrix metric_eval(const MetricField& metric, const ChartPoint& q) { return metric.eval(q); }

double inner_product(const MetricField& metric, const ChartPoint& q, const Vector& u, const Vector& v) {
    require_same_dim(q, u, "inner_product");
    require_same_dim(q, v, "inner_product");
    return u.dot(metric.eval(q) * v);
}

double metric_norm(const MetricField& metric, const ChartPoint& q, const Vector& v) {
    return std::sqrt(inner_product(metric, q, v, v));
}

namespace {

// First-kind symbols [l; jk] = 1/2 (d_j g_lk + d_k g_jl - d_l g_jk) raised with g^-1.
ChristoffelSymbols christoffel_from_partials(const Matrix& g, const std::vector<Matrix>& dg, const Vector& q) {
    const auto n = g.rows();
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("christoffel: singular metric at point " + format_point(q));
    }
    const Matrix ginv = llt.solve(Matrix::Identity(n, n));
    ChristoffelSymbols out;
    out.gamma.assign(static_cast<std::size_t>(n), Matrix::Zero(n, n));
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = j; k < n; ++k) {
            Vector first(n);
            for (Eigen::Index l = 0; l < n; ++l) {
                first[l] = 0.5 * (dg[static_cast<std::size_t>(j)](l, k) + dg[static_cast<std::size_t>(k)](j, l) -
                                  dg[static_cast<std::size_t>(l)](j, k));
            }
            const Vector second = ginv * first;
            for (Eigen::Index i = 0; i < n; ++i) {
                out.gamma[static_cast<std::size_t>(i)](j, k) = second[i];
                out.gamma[static_cast<std::size_t>(i)](k, j) = second[i];
            }
        }
    }
    return out;
}

}  // namespace

ChristoffelSymbols christoffel(const MetricField& metric, const ChartPoint& q) {
    return christoffel_from_partials(metric.eval(q), metric.partials(q), q);
}

ChristoffelSymbols christoffel_finite_difference(const MetricField& metric, const ChartPoint& q, double h) {
    return christoffel_from_partials(metric.eval(q), metric.finite_difference_partials(q, h), q);
}

Vector christoffel_quadratic(const MetricField& metric, const ChartPoint& q, const Vector& v) {
    require_same_dim(q, v, "christoffel_quadratic");
    const Matrix g = metric.eval(q);
    const auto dg = metric.partials(q);
    const auto n = g.rows();
    Matrix directional = Matrix::Zero(n, n);  // sum_j v^j d_j g
    Vector half_quadratic(n);                 // 1/2 v^T (d_l g) v
    for (Eigen::Index l = 0; l < n; ++l) {
        const Matrix& d = dg[static_cast<std::size_t>(l)];
        directional += v[l] * d;
        half_quadratic[l] = 0.5 * v.dot(d * v);
    }
    Eigen::LLT<Matrix> llt(g);
    return llt.solve(directional * v - half_quadratic);
}

Vector covariant_acceleration(const MetricField& metric, const ChartPoint& q, const Vector& v, const Vector& a) {
    require_same_dim(q, a, "covariant_acceleration");
    return a + christoffel_quadratic(metric, q, v);
}

Vector contravariant_gradient(const MetricField& metric, const PotentialField& potential, const ChartPoint& q) {
    const Vector df = potential.differential(q);
    require_same_dim(q, df, "contravariant_gradient");
    if (!df.allFinite()) {
        throw NumericalError("contravariant_gradient: non-finite potential differential at " + format_point(q));
    }
    return factor(metric, q).solve(df);
}

TangentSplit tangential_normal_split(const MetricField& metric, const ChartPoint& q, const Vector& x,
                                     const Vector& tangent) {
    require_same_dim(q, x, "tangential_normal_split");
    require_same_dim(q, tangent, "tangential_normal_split");
    const Matrix g = metric.eval(q);
    const double tt = tangent.dot(g * tangent);
    if (!(tt > 0.0)) {
        throw InvalidArgument("tangential_normal_split: zero tangent vector");
    }
    TangentSplit split;
    split.tangential = (x.dot(g * tangent) / tt) * tangent;
    split.normal = x - split.tangential;
    return split;
}

MetricField euclidean_metric(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return MetricField(
        dim, [n](const Vector&) { return Matrix::Identity(n, n); },
        [dim, n](const Vector&) { return std::vector<Matrix>(dim, Matrix::Zero(n, n)); }, "euclidean");
}

MetricField constant_metric(const Matrix& g) {
    if (g.rows() != g.cols() || g.rows() == 0) {
        throw InvalidArgument("constant_metric: need a square matrix");
    }
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("constant_metric: matrix not symmetric");
    }
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) {
        throw InvalidArgument("constant_metric: matrix not positive definite");
    }
    const auto dim = static_cast<std::size_t>(g.rows());
    const auto n = g.rows();
    return MetricField(
        dim, [g](const Vector&) { return g; },
        [dim, n](const Vector&) { return std::vector<Matrix>(dim, Matrix::Zero(n, n)); }, "constant");
}

MetricField tabulated_metric(const GridAxis& q1, const GridAxis& q2, const Matrix& g11, const Matrix& g12,
                             const Matrix& g22, std::string name) {
    struct Tables {
        BicubicHermite c11, c12, c22;
    };
    auto tables = std::make_shared<const Tables>(Tables{BicubicHermite::from_values(q1, q2, g11),
                                                        BicubicHermite::from_values(q1, q2, g12),
                                                        BicubicHermite::from_values(q1, q2, g22)});
    auto eval = [tables](const Vector& q) {
        const double a = tables->c11.evaluate(q[0], q[1]).value;
        const double b = tables->c12.evaluate(q[0], q[1]).value;
        const double c = tables->c22.evaluate(q[0], q[1]).value;
        Matrix g(2, 2);
        g << a, b, b, c;
        return g;
    };
    auto partials = [tables](const Vector& q) {
        const auto a = tables->c11.evaluate(q[0], q[1]);
        const auto b = tables->c12.evaluate(q[0], q[1]);
        const auto c = tables->c22.evaluate(q[0], q[1]);
        Matrix d1(2, 2);
        Matrix d2(2, 2);
        d1 << a.dx, b.dx, b.dx, c.dx;
        d2 << a.dy, b.dy, b.dy, c.dy;
        return std::vector<Matrix>{d1, d2};
    };
    return MetricField(2, std::move(eval), std::move(partials), std::move(name));
}

}  // namespace nlmodes
