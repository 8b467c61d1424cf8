#include "nlmodes/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlmodes/errors.hpp"

namespace nlmodes {

GridAxis GridAxis::symmetric_about_zero(double lo, double hi, double spacing) {
    if (!(spacing > 0.0) || !(hi > lo)) {
        throw InvalidArgument("grid axis: need positive spacing and hi > lo");
    }
    const auto kmin = static_cast<long>(std::ceil(lo / spacing - 1e-9));
    const auto kmax = static_cast<long>(std::floor(hi / spacing + 1e-9));
    if (kmax - kmin < 1) {
        throw InvalidArgument("grid axis: range shorter than one spacing");
    }
    return GridAxis{static_cast<double>(kmin) * spacing, spacing, static_cast<std::size_t>(kmax - kmin + 1)};
}

std::size_t GridAxis::zero_index() const {
    const double k = std::round(-origin / spacing);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(count - 1)));
}

Matrix differentiate_x(const Matrix& f, double spacing) {
    Matrix d(f.rows(), f.cols());
    std::vector<double> column(static_cast<std::size_t>(f.rows()));
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            column[static_cast<std::size_t>(i)] = f(i, j);
        }
        const auto dc = differentiate_uniform(column, spacing);
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            d(i, j) = dc[static_cast<std::size_t>(i)];
        }
    }
    return d;
}

Matrix differentiate_y(const Matrix& f, double spacing) {
    Matrix t = f.transpose();
    return differentiate_x(t, spacing).transpose();
}

BicubicHermite::BicubicHermite(GridAxis x, GridAxis y, Matrix f, Matrix fx, Matrix fy, Matrix fxy)
    : x_(x), y_(y), f_(std::move(f)), fx_(std::move(fx)), fy_(std::move(fy)), fxy_(std::move(fxy)) {
    const auto nx = static_cast<Eigen::Index>(x_.count);
    const auto ny = static_cast<Eigen::Index>(y_.count);
    if (x_.count < 2 || y_.count < 2) {
        throw InvalidArgument("bicubic: need at least 2x2 nodes");
    }
    for (const Matrix* m : {&f_, &fx_, &fy_, &fxy_}) {
        if (m->rows() != nx || m->cols() != ny) {
            throw InvalidArgument("bicubic: node array shape does not match the axes");
        }
    }
}

BicubicHermite BicubicHermite::from_values(GridAxis x, GridAxis y, const Matrix& f) {
    Matrix fx = differentiate_x(f, x.spacing);
    Matrix fy = differentiate_y(f, y.spacing);
    Matrix fxy = differentiate_y(fx, y.spacing);
    return BicubicHermite(x, y, f, std::move(fx), std::move(fy), std::move(fxy));
}

namespace {

struct CubicBasis {
    double v[4];   // value basis: h00, h01 (corner values), h10, h11 (corner slopes)
    double d[4];   // derivative w.r.t. the unit coordinate
};

CubicBasis cubic_basis(double u) {
    const double u2 = u * u;
    const double u3 = u2 * u;
    return CubicBasis{{2 * u3 - 3 * u2 + 1, -2 * u3 + 3 * u2, u3 - 2 * u2 + u, u3 - u2},
                      {6 * u2 - 6 * u, -6 * u2 + 6 * u, 3 * u2 - 4 * u + 1, 3 * u2 - 2 * u}};
}

// Cell index and local coordinate in [0, 1].
std::pair<Eigen::Index, double> locate(const GridAxis& axis, double x) {
    const double t = (x - axis.origin) / axis.spacing;
    auto i = static_cast<Eigen::Index>(std::floor(t));
    i = std::clamp<Eigen::Index>(i, 0, static_cast<Eigen::Index>(axis.count) - 2);
    return {i, t - static_cast<double>(i)};
}

}  // namespace

BicubicHermite::Sample BicubicHermite::evaluate(double x, double y) const {
    if (!contains(x, y)) {
        throw DomainError("bicubic: point (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") outside the lattice");
    }
    const auto [i, u] = locate(x_, x);
    const auto [j, v] = locate(y_, y);
    const CubicBasis bu = cubic_basis(u);
    const CubicBasis bv = cubic_basis(v);
    const double hx = x_.spacing;
    const double hy = y_.spacing;

    Sample s;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const Eigen::Index ii = i + a;
            const Eigen::Index jj = j + b;
            const double cf = f_(ii, jj);
            const double cx = fx_(ii, jj) * hx;
            const double cy = fy_(ii, jj) * hy;
            const double cxy = fxy_(ii, jj) * hx * hy;
            // a selects the value/slope basis pair for this corner
            const double pu = bu.v[a], su = bu.v[2 + a];
            const double pv = bv.v[b], sv = bv.v[2 + b];
            const double dpu = bu.d[a], dsu = bu.d[2 + a];
            const double dpv = bv.d[b], dsv = bv.d[2 + b];
            s.value += pu * pv * cf + su * pv * cx + pu * sv * cy + su * sv * cxy;
            s.dx += (dpu * pv * cf + dsu * pv * cx + dpu * sv * cy + dsu * sv * cxy) / hx;
            s.dy += (pu * dpv * cf + su * dpv * cx + pu * dsv * cy + su * dsv * cxy) / hy;
        }
    }
    return s;
}

}  // namespace nlmodes
