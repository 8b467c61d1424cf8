#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "nlmodes/numerics.hpp"

namespace nlmodes {

/// Scalar function f on configuration space together with its differential
/// df (covariant components). The equations of motion accelerate along +grad f,
/// so oscillatory systems use a negative definite f.
class PotentialField {
public:
    using ValueFn = std::function<double(const Vector&)>;
    using DifferentialFn = std::function<Vector(const Vector&)>;

    static constexpr double kFiniteDifferenceStep = 1e-6;

    PotentialField() = default;
    /// Without `differential`, df is taken by central differences of `value`.
    PotentialField(std::size_t dim, ValueFn value, DifferentialFn differential = {}, std::string name = {});

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] bool has_analytic_differential() const { return static_cast<bool>(differential_); }

    [[nodiscard]] double value(const Vector& q) const;
    [[nodiscard]] Vector differential(const Vector& q) const;
    [[nodiscard]] Vector finite_difference_differential(const Vector& q, double h = kFiniteDifferenceStep) const;

    /// Max-abs gap between the stored differential and central differences of
    /// the value at q.
    [[nodiscard]] double differential_consistency(const Vector& q) const;

private:
    std::size_t dim_ = 0;
    ValueFn value_;
    DifferentialFn differential_;
    std::string name_;
};

}  // namespace nlmodes
