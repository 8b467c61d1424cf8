#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "nlmodes/geodesics.hpp"
#include "nlmodes/grid.hpp"
#include "nlmodes/manifold.hpp"
#include "nlmodes/numerics.hpp"
#include "nlmodes/potential.hpp"

namespace nlmodes {

/// Covariant force components F1, F2 in chart coordinates sampled along
/// the geodesic (xi2 = 0), with dF2/dxi1.
struct OnGeodesicForce {
    GridAxis xi1;
    std::vector<double> f1;
    std::vector<double> f2;
    std::vector<double> df2;
};

/// F_i(xi1, 0) = alpha(xi1) <dh/dxi^i, dgamma/dxi1>_g on the nodes
/// k * spacing inside the chart's xi1 range. F1 reduces to alpha for a
/// unit-speed geodesic. dF2/dxi1 is differentiated along the curve in closed
/// form (metric partials and the geodesic's second derivative), with alpha'
/// from 5-point differences of alpha when no derivative is given.
[[nodiscard]] OnGeodesicForce on_geodesic_force(const MetricField& metric, const GeodesicChart& chart,
                                                const std::function<double(double)>& alpha, double spacing = 0.01,
                                                const std::function<double(double)>& alpha_derivative = {});

/// Force field on a (xi1, xi2) lattice; entry (i, j) sits at (xi1[i], xi2[j]).
struct GeodesicForceField {
    GridAxis xi1;
    GridAxis xi2;
    Matrix f1;
    Matrix f2;
};

/// F1(xi1, xi2) = F1(xi1, 0) + xi2 dF2(xi1, 0)/dxi1 and
/// F2(xi1, xi2) = F2(xi1, 0) + int_0^xi2 beta.
[[nodiscard]] GeodesicForceField extend_force_field(const OnGeodesicForce& on_geodesic, const Polynomial& beta,
                                                    double halfwidth);

/// max |dF1/dxi2 - dF2/dxi1| over interior nodes, 5-point central differences.
[[nodiscard]] double integrability_residual(const GeodesicForceField& field);

struct BetaBoundReport {
    double epsilon = 0.0;
    std::vector<double> xi2;
    /// inf over |xi1| <= epsilon of (dF2(xi1,0)/dxi1)^2 / (dF1(xi1,xi2)/dxi1); NaN where undefined
    std::vector<double> bound;
    std::vector<bool> defined;
    /// nodes (xi1, xi2) whose denominator is >= 0 or changes sign towards the next xi1 node
    std::vector<std::pair<double, double>> undefined_cells;
    /// smallest bound over the defined xi2 rows
    double overall = 0.0;
};

/// Upper bound on beta that keeps the constructed potential negative
/// definite, evaluated separately for every xi2 row of the lattice.
[[nodiscard]] BetaBoundReport beta_bound(const GeodesicForceField& field, double epsilon);

/// min over defined rows of bound(xi2) - beta(xi2); positive when beta passes.
[[nodiscard]] double beta_margin(const BetaBoundReport& report, const Polynomial& beta);

/// Potential on the chart lattice, interpolated bicubically with the force
/// components as its derivatives.
class DesignedPotential {
public:
    DesignedPotential() = default;
    DesignedPotential(GeodesicForceField field, Matrix values, double path_difference);

    [[nodiscard]] BicubicHermite::Sample evaluate(const Vector& xi) const { return interp_.evaluate(xi[0], xi[1]); }
    [[nodiscard]] const Matrix& values() const { return values_; }
    [[nodiscard]] const GeodesicForceField& field() const { return field_; }
    [[nodiscard]] const GridAxis& xi1() const { return field_.xi1; }
    [[nodiscard]] const GridAxis& xi2() const { return field_.xi2; }
    /// max |f - f_alt| between the two integration paths
    [[nodiscard]] double path_difference() const { return path_difference_; }

private:
    GeodesicForceField field_;
    Matrix values_;
    BicubicHermite interp_;
    double path_difference_ = 0.0;
};

/// f(xi1, xi2) = int_0^xi1 F1(s, 0) ds + int_0^xi2 F2(xi1, s) ds, cumulative
/// Simpson. The path xi2-first is integrated as well and the largest gap
/// recorded. InvalidArgument when the field's integrability residual exceeds
/// max_residual.
[[nodiscard]] DesignedPotential integrate_potential(const GeodesicForceField& field, double max_residual = 1e-5);

/// f(q) = f_xi(chart_inverse(q)); df_q = J^{-T} df_xi. DomainError outside the chart.
[[nodiscard]] PotentialField designed_potential_in_q(std::shared_ptr<const DesignedPotential> potential,
                                                     std::shared_ptr<const GeodesicChart> chart);

struct DefinitenessReport {
    bool pass = false;
    /// largest f(q) + tol |q - q*|^2 over the samples other than q*
    double worst_margin = 0.0;
    Vector worst_point;
    Vector maximizer;
    double max_value = 0.0;
    std::size_t samples = 0;
    std::size_t skipped = 0;  // points outside the potential's domain
};

/// Passes iff f(q) < -tol |q - q*|^2 at every sample q != q* and no sample
/// exceeds f(q*).
[[nodiscard]] DefinitenessReport definiteness_check(const PotentialField& potential, const std::vector<Vector>& points,
                                                    double tol, const Vector& equilibrium);

/// Images under the chart of the lattice nodes k * spacing in its domain.
[[nodiscard]] std::vector<Vector> chart_lattice_points(const GeodesicChart& chart, double spacing);

struct DesignInput {
    ChartPoint origin = Vector::Zero(2);
    Vector direction;  // defaults to (cos(-pi/4), sin(-pi/4)) when empty
    bool normalize_direction = true;
    double geodesic_half_length = 1.75;
    double geodesic_step = 1e-3;
    double halfwidth = 0.3;
    double min_determinant = GeodesicChart::kDefaultMinDeterminant;
    Polynomial alpha = Polynomial({0.0, -5.0});
    Polynomial beta = Polynomial({-47.86});
    /// xi1 half-width for the beta bound; 0 uses the whole chart range
    double epsilon = 0.0;
    double spacing = 0.01;
};

struct DesignedSystem {
    std::shared_ptr<const GeodesicChart> chart;
    OnGeodesicForce on_geodesic;
    std::shared_ptr<const DesignedPotential> potential_xi;
    PotentialField potential;
    double integrability = 0.0;
    BetaBoundReport bound;
    double beta_margin = 0.0;
};

/// Geodesic shooting, chart, force field, bound check and potential in one go.
[[nodiscard]] DesignedSystem design_system(const MetricField& metric, const DesignInput& input);

/// xi1,xi2,f,q1,q2 on the potential lattice (every `stride`-th node).
void write_potential_grid_csv(std::ostream& os, const DesignedPotential& potential, const GeodesicChart& chart,
                              std::size_t stride = 1);
/// xi1,xi2,F1,F2 on the force lattice (every `stride`-th node).
void write_force_field_csv(std::ostream& os, const GeodesicForceField& field, std::size_t stride = 1);

}  // namespace nlmodes
