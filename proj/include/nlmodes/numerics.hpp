#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nlmodes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

[[nodiscard]] bool all_finite(const Vector& v);

/// Finite-difference weights for the derivative of order `order` at `x0`
/// from samples at `nodes` (Fornberg's recursion; nodes need not be uniform).
[[nodiscard]] std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order);

/// Central 5-point first derivative of uniformly spaced samples; the two
/// boundary nodes on each side use one-sided 5-point stencils.
[[nodiscard]] std::vector<double> differentiate_uniform(std::span<const double> values, double spacing);

/// Running integral of uniformly spaced samples, starting at 0 for index 0.
/// Each interval is integrated with the quadratic through three neighbouring
/// nodes, so pairs of intervals sum to composite Simpson exactly.
[[nodiscard]] std::vector<double> cumulative_simpson(std::span<const double> values, double spacing);

/// Running integral measured from the node `origin`: result[i] is the
/// integral from x[origin] to x[i] (negative to the left of the origin).
[[nodiscard]] std::vector<double> cumulative_simpson_from(std::span<const double> values, double spacing,
                                                          std::size_t origin);

/// Composite Simpson over [a, b] with an even number of panels.
[[nodiscard]] double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels);

struct ScalarOptimum {
    double x = 0.0;
    double value = 0.0;
    std::size_t evaluations = 0;
};

/// Golden-section search for a maximum of `f` on [lo, hi].
[[nodiscard]] ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo,
                                                    double hi, double x_tolerance);

/// Real polynomial c0 + c1 x + c2 x^2 + ...
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coefficients);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] Polynomial derivative() const;
    /// Antiderivative vanishing at x = 0.
    [[nodiscard]] Polynomial antiderivative() const;
    [[nodiscard]] const std::vector<double>& coefficients() const { return coefficients_; }
    [[nodiscard]] bool is_constant() const { return coefficients_.size() <= 1; }

private:
    std::vector<double> coefficients_;
};

/// Quintic Hermite interpolation on [0, h] from value, first and second
/// derivative at both ends. Returns value and the first two derivatives at t.
struct HermiteValue {
    Vector value;
    Vector first;
    Vector second;
};
[[nodiscard]] HermiteValue quintic_hermite(const Vector& p0, const Vector& d0, const Vector& a0,
                                           const Vector& p1, const Vector& d1, const Vector& a1,
                                           double h, double t);

}  // namespace nlmodes
