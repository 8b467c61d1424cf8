// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nlmodes/design.hpp"
#include "nlmodes/dynamics.hpp"
#include "nlmodes/geodesics.hpp"
#include "nlmodes/manifold.hpp"
#include "nlmodes/modes.hpp"
#include "nlmodes/runner.hpp"

using namespace nlmodes;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Vector v2(double a, double b) { return Vector{{a, b}}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const DesignedSystem& designed_example() {
    static const DesignedSystem sys = design_system(double_pendulum_metric(), DesignInput{});
    return sys;
}

// on-geodesic start at the chart origin with the g-speed that gives energy E
State geodesic_start(const DesignedSystem& sys, double energy) {
    const auto p = sys.chart->geodesic().at(0.0);
    return {p.q, std::sqrt(2.0 * (energy + sys.potential.value(p.q))) * p.tangent, 0.0};
}

double speed_law_period(double energy) {
    return speed_law_solve([](double s) { return -5.0 * s; }, energy, -1.75, 1.75).period();
}

Outcome energy_conservation() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> uq(-1.0, 1.0), uv(-4.0, 4.0);
    IntegrationOptions opt;
    opt.energy_drift_tolerance = std::numeric_limits<double>::infinity();
    double worst = 0.0;
    double emax = 0.0;
    int runs = 0;
    while (runs < 10) {
        const State s0{v2(uq(rng), uq(rng)), v2(uv(rng), uv(rng)), 0.0};
        const double e = total_energy(m, f, s0);
        if (e > 60.0) {
            continue;
        }
        emax = std::max(emax, e);
        worst = std::max(worst, integrate(m, f, s0, 200.0, 1e-3, opt).max_relative_energy_drift());
        ++runs;
    }
    const double elapsed = seconds_since(t0);
    return {worst < 1e-6 && elapsed < 60.0,
            fmt("max relative drift %.3e over 10 runs (E <= %.2f J), %.1f s", worst, emax, elapsed)};
}

Outcome straight_modes_in_constant_metrics() {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_chord = 0.0;
    double worst_residual = 0.0;
    for (int k = 0; k < 5; ++k) {
        Matrix l(2, 2);
        l << 1.0 + std::abs(u(rng)), 0.0, u(rng), 0.5 + std::abs(u(rng));
        const Matrix g = l * l.transpose();
        const auto m = constant_metric(g);

        const auto c = shoot_geodesic(m, v2(u(rng), u(rng)), v2(u(rng), u(rng)), 2.0, 1e-3);
        const Vector a = c.samples().front().q;
        const Vector b = c.samples().back().q;
        for (const auto& s : c.samples()) {
            worst_chord = std::max(worst_chord, (s.q - (a + (s.s / c.s_max()) * (b - a))).norm());
        }

        // with p = L^T q the metric is the identity, so f = -1/2 sum k_i p_i^2 is
        // separable and its modal lines are the p axes, q = L^{-T} e_i t
        const Vector stiff = v2(1.0 + 4.0 * std::abs(u(rng)), 1.0 + 4.0 * std::abs(u(rng)));
        const PotentialField f(
            2,
            [l, stiff](const Vector& q) {
                const Vector p = l.transpose() * q;
                return -0.5 * (stiff.array() * p.array() * p.array()).sum();
            },
            [l, stiff](const Vector& q) {
                const Vector p = l.transpose() * q;
                return Vector(-(l * (stiff.array() * p.array()).matrix()));
            });
        const Matrix lt_inv = l.transpose().inverse();
        for (int i = 0; i < 2; ++i) {
            std::vector<Vector> curve;
            for (int j = 0; j <= 200; ++j) {
                curve.push_back(lt_inv.col(i) * (-1.0 + j / 100.0));
            }
            const auto r = verify_strict_mode(m, f, curve, 1e-10);
            worst_residual = std::max({worst_residual, r.max_geodesic_residual, r.max_tangency_residual});
        }
    }
    return {worst_chord < 1e-10 && worst_residual < 1e-10,
            fmt("max chord deviation %.3e, max modal-line residual %.3e", worst_chord, worst_residual)};
}

Outcome christoffel_oracle() {
    const auto m = double_pendulum_metric();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const Vector q = v2(-pi + 2 * pi * i / 19.0, -pi + 2 * pi * j / 19.0);
            const auto a = christoffel(m, q);
            const auto b = christoffel_finite_difference(m, q);
            for (int c = 0; c < 2; ++c) {
                worst = std::max(worst, (a.gamma[c] - b.gamma[c]).cwiseAbs().maxCoeff());
            }
        }
    }
    return {worst < 1e-6, fmt("max |analytic - finite difference| %.3e on 20x20 grid", worst)};
}

Outcome linearization_oracle() {
    const auto modes = linearized_modes(double_pendulum_metric(), circular_potential(100.0), v2(0, 0));
    const double w2[] = {100.0 / (3.0 + 2.0 * std::sqrt(2.0)), 100.0 / (3.0 - 2.0 * std::sqrt(2.0))};
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        worst = std::max(worst, std::abs(modes[i].omega * modes[i].omega - w2[i]) / w2[i]);
    }
    return {modes.size() == 2 && worst < 1e-9,
            fmt("omega = %.10f, %.10f rad/s, max relative error of omega^2 %.3e", modes[0].omega, modes[1].omega, worst)};
}

Outcome speed_law() {
    const auto& sys = designed_example();
    const auto m = double_pendulum_metric();
    const double e = 5.63;
    const double turn = std::sqrt(2.0 * e / 5.0);
    const auto traj = integrate(m, sys.potential, geodesic_start(sys, e), 0.25 * speed_law_period(e) + 0.05, 1e-3);
    double worst = 0.0;
    double reached = 0.0;
    for (const auto& s : traj.samples) {
        const double xi1 = sys.chart->inverse(s.q)[0];
        if (s.qdot.dot(m.eval(s.q) * sys.chart->geodesic().at(xi1).tangent) <= 0.0) {
            break;  // past the turning point
        }
        reached = xi1;
        worst = std::max(worst, std::abs(metric_norm(m, s.q, s.qdot) - std::sqrt(2.0 * e - 5.0 * xi1 * xi1)));
    }
    return {worst < 1e-4 && reached > 0.99 * turn,
            fmt("max |speed - sqrt(2E - 5 s^2)| %.3e up to s = %.4f (turning point %.4f)", worst, reached, turn)};
}

Outcome design_end_to_end() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& sys = designed_example();
    const auto m = double_pendulum_metric();
    const auto geodesic = sys.chart->geodesic().points();
    double worst_dev = 0.0;
    double worst_level = 0.0;
    std::size_t turns = 0;
    for (double e : {1.0, 3.0, 5.63}) {
        const auto traj = integrate(m, sys.potential, geodesic_start(sys, e), 3.0 * speed_law_period(e), 1e-3);
        for (const auto& s : traj.samples) {
            worst_dev = std::max(worst_dev, metric_distance_to_polyline(m, geodesic, s.q));
        }
        for (const auto& tp : turning_points(m, sys.potential, traj)) {
            worst_level = std::max(worst_level, std::abs(tp.potential + e));
            ++turns;
        }
    }
    const double elapsed = seconds_since(t0);
    return {worst_dev < 1e-3 && worst_level < 1e-6 && turns >= 15 && elapsed < 30.0,
            fmt("max g-distance to geodesic %.3e rad, max turning-level error %.3e J over %zu turns, %.1f s", worst_dev,
                worst_level, turns, elapsed)};
}

Outcome necessity_probe() {
    std::vector<Vector> curve;
    for (int i = 0; i <= 400; ++i) {
        const double x = -0.5 + i / 400.0;
        curve.push_back(v2(x, -x));
    }
    ScalingOptions opt;
    opt.horizon = 1.0;
    const auto r = scaling_invariance_test(double_pendulum_metric(), circular_potential(100.0), curve, {1.0, 2.0}, opt);
    const double ratio = r[1].normal_acceleration_ratio;
    return {r[1].ratio_defined && std::abs(ratio - 4.0) <= 1e-6,
            fmt("normal covariant acceleration ratio c=2 vs c=1: %.12f", ratio)};
}

Outcome unison() {
    const auto& sys = designed_example();
    const double e = 5.63;
    const double dt = 1e-3;
    const auto traj =
        integrate(double_pendulum_metric(), sys.potential, geodesic_start(sys, e), 5.0 * speed_law_period(e), dt);
    auto merged = [&](std::size_t c) {
        const auto x = velocity_zero_crossings(traj, c);
        std::vector<double> t = x.rising;
        t.insert(t.end(), x.falling.begin(), x.falling.end());
        std::sort(t.begin(), t.end());
        return t;
    };
    const auto a = merged(0);
    const auto b = merged(1);
    double worst = a.size() == b.size() ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return {a.size() == b.size() && a.size() >= 9 && worst <= dt,
            fmt("%zu crossings of q1', %zu of q2', max time offset %.3e s (step %.0e s)", a.size(), b.size(), worst, dt)};
}

double angle_of(const Vector& v) { return std::atan2(v[1], v[0]); }

// smallest angle between two lines through the origin, degrees
double line_angle_deg(double a, double b) {
    double d = std::fmod(std::abs(a - b), pi);
    return std::min(d, pi - d) * 180.0 / pi;
}

double relative_bending(const std::vector<Vector>& curve) {
    const Vector a = curve.front();
    const Vector b = curve.back();
    const Vector u = (b - a).normalized();
    double worst = 0.0;
    for (const auto& q : curve) {
        const Vector d = q - a;
        worst = std::max(worst, (d - d.dot(u) * u).norm());
    }
    return worst / (b - a).norm();
}

Outcome mode_detection() {
    const auto m = double_pendulum_metric();
    const auto f = circular_potential(100.0);
    const auto linear = linearized_modes(m, f, v2(0, 0));
    double worst_angle = 0.0;
    double worst_level = 0.0;
    double worst_speed = 0.0;
    std::vector<ModeCandidate> high;
    for (const auto& lm : linear) {
        const double seed = angle_of(lm.direction);
        for (double e : {0.01, 50.0}) {
            const auto c = find_mode(m, f, e, seed);
            worst_level = std::max(worst_level, std::abs(f.value(c.start) + e));
            worst_speed = std::max(worst_speed, c.trajectory.samples.front().qdot.norm());
            if (e < 1.0) {
                worst_angle = std::max(worst_angle, line_angle_deg(angle_of(c.start), seed));
            } else {
                high.push_back(c);
            }
        }
    }
    const double bend[] = {relative_bending(high[0].curve), relative_bending(high[1].curve)};
    const std::size_t deforming = bend[0] > bend[1] ? 0 : 1;
    const auto rd = verify_strict_mode(m, f, high[deforming].curve);
    const auto rs = verify_strict_mode(m, f, high[1 - deforming].curve);
    const double geo_ratio = rd.max_geodesic_residual / rs.max_geodesic_residual;
    const double tan_ratio = rd.max_tangency_residual / rs.max_tangency_residual;
    const bool pass = worst_angle < 2.0 && worst_level <= 1e-9 && worst_speed == 0.0 && geo_ratio >= 5.0 &&
                      tan_ratio >= 5.0;
    return {pass, fmt("E=0.01: max angle to eigenvector %.4f deg; level error %.1e, start speed %.1e; E=50: deforming "
                      "family %s (bending %.4f vs %.4f), residual ratios geodesic %.2f, tangency %.2f",
                      worst_angle, worst_level, worst_speed, deforming == 0 ? "slow" : "fast", bend[deforming],
                      bend[1 - deforming], geo_ratio, tan_ratio)};
}

Outcome integrability() {
    const auto& sys = designed_example();
    const double residual = sys.integrability;
    const double gap = sys.potential_xi->path_difference();
    return {residual < 1e-6 && gap < 1e-5 && sys.potential_xi->xi1().spacing == 0.01,
            fmt("residual %.3e at spacing 0.01, two-path difference %.3e", residual, gap)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / "nlmodes_acceptance_determinism";
    fs::remove_all(base);
    cli::RunOptions opt;
    opt.jobs = 0;
    opt.out_dir = base / "a";
    const auto a = cli::run_scenario("paper-3-2", opt);
    opt.out_dir = base / "b";
    opt.jobs = 1;
    const auto b = cli::run_scenario("paper-3-2", opt);
    bool same = a.exit_code == 0 && b.exit_code == 0 && a.files.size() == b.files.size();
    std::size_t compared = 0;
    for (std::size_t i = 0; same && i < a.files.size(); ++i) {
        same = a.files[i].filename() == b.files[i].filename() && slurp(a.files[i]) == slurp(b.files[i]);
        ++compared;
    }
    fs::remove_all(base);
    return {same && compared > 0, fmt("%zu files compared, exit codes %d/%d, %s", compared, a.exit_code, b.exit_code,
                                      same ? "byte-identical" : "outputs differ")};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"energy conservation", energy_conservation},
        {"straight strict modes for constant metrics", straight_modes_in_constant_metrics},
        {"christoffel oracle", christoffel_oracle},
        {"linearization oracle", linearization_oracle},
        {"speed law", speed_law},
        {"designed system stays on its geodesic", design_end_to_end},
        {"necessity probe", necessity_probe},
        {"unison oscillation", unison},
        {"mode detection", mode_detection},
        {"integrability and path independence", integrability},
        {"determinism", determinism},
    };
    int failed = 0;
    int n = 0;
    for (const auto& [name, check] : criteria) {
        ++n;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("AC%-2d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", n - failed, n);
    return failed == 0 ? 0 : 1;
}
