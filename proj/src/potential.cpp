#include "nlmodes/potential.hpp"

#include "nlmodes/errors.hpp"

namespace nlmodes {

PotentialField::PotentialField(std::size_t dim, ValueFn value, DifferentialFn differential, std::string name)
    : dim_(dim), value_(std::move(value)), differential_(std::move(differential)), name_(std::move(name)) {
    if (dim_ == 0 || !value_) {
        throw InvalidArgument("PotentialField: dimension must be >= 1 and value must be set");
    }
}

double PotentialField::value(const Vector& q) const {
    if (static_cast<std::size_t>(q.size()) != dim_) {
        throw InvalidArgument("PotentialField: dimension mismatch");
    }
    return value_(q);
}

Vector PotentialField::finite_difference_differential(const Vector& q, double h) const {
    if (static_cast<std::size_t>(q.size()) != dim_) {
        throw InvalidArgument("PotentialField: dimension mismatch");
    }
    Vector d(q.size());
    Vector qp = q;
    Vector qm = q;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        d[k] = (value_(qp) - value_(qm)) / (2.0 * h);
        qp[k] = q[k];
        qm[k] = q[k];
    }
    return d;
}

Vector PotentialField::differential(const Vector& q) const {
    if (!differential_) {
        return finite_difference_differential(q);
    }
    if (static_cast<std::size_t>(q.size()) != dim_) {
        throw InvalidArgument("PotentialField: dimension mismatch");
    }
    return differential_(q);
}

double PotentialField::differential_consistency(const Vector& q) const {
    return (differential(q) - finite_difference_differential(q)).cwiseAbs().maxCoeff();
}

}  // namespace nlmodes
