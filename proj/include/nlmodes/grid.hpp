#pragma once

#include <cstddef>

#include "nlmodes/numerics.hpp"

namespace nlmodes {

/// Uniform 1-D lattice: origin + i * spacing, i in [0, count).
struct GridAxis {
    double origin = 0.0;
    double spacing = 1.0;
    std::size_t count = 0;

    [[nodiscard]] double at(std::size_t i) const { return origin + static_cast<double>(i) * spacing; }
    [[nodiscard]] double last() const { return at(count - 1); }
    [[nodiscard]] bool contains(double x, double slack = 1e-12) const {
        return x >= origin - slack && x <= last() + slack;
    }
    /// Axis covering [lo, hi] with the given spacing and a node exactly at 0
    /// when 0 lies inside.
    [[nodiscard]] static GridAxis symmetric_about_zero(double lo, double hi, double spacing);
    /// Index of the node nearest to 0 (exact when the axis was built by
    /// symmetric_about_zero).
    [[nodiscard]] std::size_t zero_index() const;
};

/// Bicubic Hermite interpolant on a rectangular lattice. Values and first
/// derivatives of the interpolant are mutually consistent (the gradient is
/// the exact derivative of the interpolated value) and C1 across cells.
class BicubicHermite {
public:
    struct Sample {
        double value = 0.0;
        double dx = 0.0;
        double dy = 0.0;
    };

    BicubicHermite() = default;
    BicubicHermite(GridAxis x, GridAxis y, Matrix f, Matrix fx, Matrix fy, Matrix fxy);

    /// Derivatives estimated with 5-point finite differences of the samples.
    [[nodiscard]] static BicubicHermite from_values(GridAxis x, GridAxis y, const Matrix& f);

    [[nodiscard]] Sample evaluate(double x, double y) const;
    [[nodiscard]] bool contains(double x, double y) const { return x_.contains(x) && y_.contains(y); }
    [[nodiscard]] const GridAxis& x_axis() const { return x_; }
    [[nodiscard]] const GridAxis& y_axis() const { return y_; }
    [[nodiscard]] const Matrix& values() const { return f_; }

private:
    GridAxis x_;
    GridAxis y_;
    Matrix f_;
    Matrix fx_;
    Matrix fy_;
    Matrix fxy_;
};

/// 5-point finite-difference derivative of a lattice function f(i, j) with
/// respect to the first (x) or second (y) index.
[[nodiscard]] Matrix differentiate_x(const Matrix& f, double spacing);
[[nodiscard]] Matrix differentiate_y(const Matrix& f, double spacing);

}  // namespace nlmodes
