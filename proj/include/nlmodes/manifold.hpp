#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nlmodes/grid.hpp"
#include "nlmodes/numerics.hpp"
#include "nlmodes/potential.hpp"

namespace nlmodes {

/// Configuration coordinates q in one chart.
using ChartPoint = Vector;

/// Riemannian metric in a coordinate chart: q -> symmetric positive definite
/// g_ij(q), plus the partial derivatives dg/dx^k.
class MetricField {
public:
    using EvalFn = std::function<Matrix(const Vector&)>;
    /// Returns one n x n matrix per coordinate: result[k](i, j) = d g_ij / d x^k.
    using PartialsFn = std::function<std::vector<Matrix>(const Vector&)>;

    static constexpr double kFiniteDifferenceStep = 1e-6;

    MetricField() = default;
    MetricField(std::size_t dim, EvalFn eval, PartialsFn partials = {}, std::string name = {});

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] bool has_analytic_partials() const { return static_cast<bool>(partials_); }

    /// Components at q; throws NumericalError("invalid metric at point ...")
    /// when the result is not finite, symmetric or positive definite.
    [[nodiscard]] Matrix eval(const Vector& q) const;
    /// Components without validation.
    [[nodiscard]] Matrix raw(const Vector& q) const;

    [[nodiscard]] std::vector<Matrix> partials(const Vector& q) const;
    [[nodiscard]] std::vector<Matrix> finite_difference_partials(const Vector& q,
                                                                 double h = kFiniteDifferenceStep) const;

private:
    void check_dim(const Vector& q) const;

    std::size_t dim_ = 0;
    EvalFn eval_;
    PartialsFn partials_;
    std::string name_;
};

/// Christoffel symbols of the second kind at a point; gamma[i](j, k) = Gamma^i_jk.
struct ChristoffelSymbols {
    std::vector<Matrix> gamma;

    [[nodiscard]] std::size_t dim() const { return gamma.size(); }
    /// Gamma^i_jk u^j v^k.
    [[nodiscard]] Vector contract(const Vector& u, const Vector& v) const;
};

/// Orthogonal decomposition x = tangential + normal in the metric g.
struct TangentSplit {
    Vector tangential;
    Vector normal;
};

[[nodiscard]] Matrix metric_eval(const MetricField& metric, const ChartPoint& q);

[[nodiscard]] double inner_product(const MetricField& metric, const ChartPoint& q, const Vector& u, const Vector& v);
[[nodiscard]] double metric_norm(const MetricField& metric, const ChartPoint& q, const Vector& v);

/// Levi-Civita symbols Gamma^i_jk = 1/2 g^il (d_j g_lk + d_k g_jl - d_l g_jk).
[[nodiscard]] ChristoffelSymbols christoffel(const MetricField& metric, const ChartPoint& q);
/// Christoffel symbols from central differences of the metric values alone,
/// ignoring any analytic partials.
[[nodiscard]] ChristoffelSymbols christoffel_finite_difference(const MetricField& metric, const ChartPoint& q,
                                                               double h = MetricField::kFiniteDifferenceStep);

/// Gamma^i_jk v^j v^k without forming the full symbol array.
[[nodiscard]] Vector christoffel_quadratic(const MetricField& metric, const ChartPoint& q, const Vector& v);

/// Coordinate form of the covariant derivative of a velocity along itself:
/// a^i + Gamma^i_jk v^j v^k.
[[nodiscard]] Vector covariant_acceleration(const MetricField& metric, const ChartPoint& q, const Vector& v,
                                            const Vector& a);

/// grad f with components g^ij d_j f.
[[nodiscard]] Vector contravariant_gradient(const MetricField& metric, const PotentialField& potential,
                                            const ChartPoint& q);

[[nodiscard]] TangentSplit tangential_normal_split(const MetricField& metric, const ChartPoint& q, const Vector& x,
                                                   const Vector& tangent);

// Built-in and tabulated metrics.

[[nodiscard]] MetricField euclidean_metric(std::size_t dim);
/// Constant symmetric positive definite metric.
[[nodiscard]] MetricField constant_metric(const Matrix& g);

/// n = 2 metric tabulated on a lattice (components g11, g12, g22) and
/// interpolated bicubically; partials are the interpolant's derivatives.
[[nodiscard]] MetricField tabulated_metric(const GridAxis& q1, const GridAxis& q2, const Matrix& g11,
                                           const Matrix& g12, const Matrix& g22, std::string name = "tabulated");

}  // namespace nlmodes
