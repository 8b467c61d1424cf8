#include "nlmodes/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "nlmodes/csv.hpp"
#include "nlmodes/design.hpp"
#include "nlmodes/dynamics.hpp"
#include "nlmodes/geodesics.hpp"
#include "nlmodes/modes.hpp"

namespace nlmodes::cli {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// schema access

class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            throw ConfigError(where() + ": expected a mapping");
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

    YAML::Node raw(const std::string& key) {
        used_.insert(key);
        return has(key) ? node_[key] : YAML::Node();
    }

    double real(const std::string& key) {
        if (!has(key)) {
            throw ConfigError(where(key) + ": required");
        }
        return to_real(raw(key), where(key));
    }
    double real(const std::string& key, double fallback) { return has(key) ? real(key) : (used_.insert(key), fallback); }
    double positive(const std::string& key, double fallback) {
        const double v = real(key, fallback);
        if (!(v > 0.0)) {
            throw ConfigError(where(key) + ": must be positive");
        }
        return v;
    }
    double non_negative(const std::string& key, double fallback) {
        const double v = real(key, fallback);
        if (!(v >= 0.0)) {
            throw ConfigError(where(key) + ": must not be negative");
        }
        return v;
    }
    std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum = 1) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        const double v = real(key);
        if (v != std::floor(v) || v < static_cast<double>(minimum) || v > 1e9) {
            throw ConfigError(where(key) + ": expected an integer >= " + std::to_string(minimum));
        }
        return static_cast<std::size_t>(v);
    }
    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        try {
            return raw(key).as<bool>();
        } catch (const YAML::Exception&) {
            throw ConfigError(where(key) + ": expected true or false");
        }
    }
    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        const YAML::Node n = raw(key);
        if (!n.IsScalar()) {
            throw ConfigError(where(key) + ": expected a string");
        }
        return n.Scalar();
    }
    std::vector<double> reals(const std::string& key, std::vector<double> fallback = {}) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        return to_reals(raw(key), where(key));
    }
    Vector vector(const std::string& key, std::optional<std::size_t> size = {}) {
        if (!has(key)) {
            throw ConfigError(where(key) + ": required");
        }
        const auto v = reals(key);
        if (size && v.size() != *size) {
            throw ConfigError(where(key) + ": expected " + std::to_string(*size) + " entries");
        }
        return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    Vector vector(const std::string& key, const Vector& fallback) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        return vector(key, static_cast<std::size_t>(fallback.size()));
    }
    Section section(const std::string& key) { return Section(raw(key), where(key)); }

    /// Unknown keys are schema errors, which catches misspelt options.
    void finish() const {
        if (!node_ || !node_.IsMap()) {
            return;
        }
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key)) {
                throw ConfigError(where(key) + ": unknown key");
            }
        }
    }

    [[nodiscard]] std::string where(const std::string& key = {}) const {
        if (key.empty()) {
            return path_.empty() ? "<root>" : path_;
        }
        return path_.empty() ? key : path_ + "." + key;
    }

    static double to_real(const YAML::Node& n, const std::string& where) {
        if (!n.IsScalar()) {
            throw ConfigError(where + ": expected a number");
        }
        double v = 0.0;
        try {
            v = n.as<double>();
        } catch (const YAML::Exception&) {
            throw ConfigError(where + ": expected a number, got '" + n.Scalar() + "'");
        }
        if (!std::isfinite(v)) {
            throw ConfigError(where + ": must be finite");
        }
        return v;
    }
    static std::vector<double> to_reals(const YAML::Node& n, const std::string& where) {
        if (!n.IsSequence()) {
            throw ConfigError(where + ": expected a list of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < n.size(); ++i) {
            out.push_back(to_real(n[i], where + "[" + std::to_string(i) + "]"));
        }
        return out;
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// configuration types

struct MetricSpec {
    std::string kind = "double_pendulum";
    std::size_t dim = 2;
    Matrix constant;
    fs::path grid;
};

struct PotentialSpec {
    std::string kind = "circular";
    double k0 = 100.0;
    Vector stiffness;
    double value = 0.0;
    DesignInput design;
};

struct CurveSpec {
    std::string kind;
    fs::path file;
    Vector from;
    Vector to;
    std::size_t points = 201;
    Vector origin;
    Vector direction;
    double half_length = 1.0;
    double step = 1e-3;
};

struct SimulateParams {
    struct Start {
        Vector q;
        Vector qdot;
    };
    struct RestStart {
        double energy = 0.0;
        double angle = 0.0;
    };
    std::vector<Start> starts;
    std::vector<RestStart> rest_starts;
    double horizon = 10.0;
    double dt = 1e-3;
    double tol_energy = 1e-6;
    std::size_t stride = 1;
};

struct GeodesicParams {
    Vector origin;
    Vector direction;
    bool normalize = true;
    double half_length = 1.75;
    double step = 1e-3;
    double unit_speed_tolerance = 1e-6;
    double chart_halfwidth = 0.3;
    double min_determinant = GeodesicChart::kDefaultMinDeterminant;
    double grid_resolution = 0.1;
};

struct LinearizeParams {
    Vector equilibrium;
};

struct ModesFindParams {
    std::vector<double> energies;
    std::vector<double> seeds;  // radians; empty = linearized directions
    ModeSearchOptions search;
    double verify_tolerance = 1e-4;
    bool write_trajectories = false;
    std::size_t trajectory_stride = 10;
};

struct ModesVerifyParams {
    std::vector<CurveSpec> curves;
    double tolerance = 1e-4;
};

struct DesignParams {
    DesignInput input;
    std::vector<double> energies;
    double periods = 3.0;
    double dt = 1e-3;
    double tol_energy = 1e-6;
    double verify_tolerance = 1e-6;
    double integrability_tolerance = 1e-6;
    double path_tolerance = 1e-5;
    double deviation_limit = 1e-3;
    double level_tolerance = 1e-6;
    double definiteness_tolerance = 1e-9;
    double definiteness_spacing = 0.05;
    std::size_t grid_stride = 10;
    std::size_t trajectory_stride = 1;
};

struct InvarianceParams {
    CurveSpec curve;
    std::vector<double> scales{0.5, 1.0, 2.0};
    ScalingOptions options;
};

struct Scenario {
    std::string experiment;
    fs::path output;
    MetricSpec metric;
    std::optional<PotentialSpec> potential;
    SimulateParams simulate;
    GeodesicParams geodesic;
    LinearizeParams linearize;
    ModesFindParams modes_find;
    ModesVerifyParams modes_verify;
    DesignParams design;
    InvarianceParams invariance;
    YAML::Node echo;
};

// ---------------------------------------------------------------------------
// parsing

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

MetricSpec parse_metric(const YAML::Node& node, const fs::path& base) {
    MetricSpec m;
    if (!node) {
        return m;
    }
    if (node.IsScalar()) {
        m.kind = node.Scalar();
        if (m.kind != "double_pendulum" && m.kind != "euclidean") {
            throw ConfigError("system.metric: unknown metric '" + m.kind +
                              "' (double_pendulum, euclidean, or a mapping with type constant/grid)");
        }
        return m;
    }
    Section s(node, "system.metric");
    m.kind = s.text("type", "");
    if (m.kind == "double_pendulum") {
    } else if (m.kind == "euclidean") {
        m.dim = s.count("dim", 2);
    } else if (m.kind == "constant") {
        const YAML::Node g = s.raw("g");
        if (!g || !g.IsSequence() || g.size() == 0) {
            throw ConfigError("system.metric.g: expected a square matrix (list of rows)");
        }
        const auto n = static_cast<Eigen::Index>(g.size());
        m.constant.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto row = Section::to_reals(g[static_cast<std::size_t>(i)],
                                               "system.metric.g[" + std::to_string(i) + "]");
            if (static_cast<Eigen::Index>(row.size()) != n) {
                throw ConfigError("system.metric.g: matrix is not square");
            }
            for (Eigen::Index j = 0; j < n; ++j) {
                m.constant(i, j) = row[static_cast<std::size_t>(j)];
            }
        }
        m.dim = static_cast<std::size_t>(n);
    } else if (m.kind == "grid") {
        m.grid = resolve(base, s.text("file", ""));
        if (!fs::is_regular_file(m.grid)) {
            throw ConfigError("system.metric.file: cannot read '" + m.grid.string() + "'");
        }
    } else {
        throw ConfigError("system.metric.type: unknown metric '" + m.kind + "'");
    }
    s.finish();
    return m;
}

void parse_design_input(Section& s, DesignInput& d) {
    d.origin = s.vector("origin", Vector(Vector::Zero(2)));
    if (s.has("direction")) {
        d.direction = s.vector("direction", std::size_t{2});
    } else {
        s.raw("direction");
    }
    d.normalize_direction = s.flag("normalize_direction", d.normalize_direction);
    d.geodesic_half_length = s.positive("geodesic_half_length", d.geodesic_half_length);
    d.geodesic_step = s.positive("geodesic_step", d.geodesic_step);
    d.halfwidth = s.positive("halfwidth", d.halfwidth);
    d.min_determinant = s.positive("min_determinant", d.min_determinant);
    if (s.has("alpha")) {
        d.alpha = Polynomial(s.reals("alpha"));
    } else {
        s.raw("alpha");
    }
    if (s.has("beta")) {
        const YAML::Node b = s.raw("beta");
        d.beta = b.IsSequence() ? Polynomial(Section::to_reals(b, s.where("beta")))
                                : Polynomial({Section::to_real(b, s.where("beta"))});
    } else {
        s.raw("beta");
    }
    d.epsilon = s.non_negative("epsilon", d.epsilon);
    d.spacing = s.positive("spacing", d.spacing);
}

PotentialSpec parse_potential(const YAML::Node& node) {
    Section s(node, "system.potential");
    PotentialSpec p;
    p.kind = s.text("type", "");
    if (p.kind == "circular") {
        p.k0 = s.positive("k0", p.k0);
    } else if (p.kind == "quadratic") {
        p.stiffness = s.vector("stiffness");
        if ((p.stiffness.array() <= 0.0).any()) {
            throw ConfigError("system.potential.stiffness: entries must be positive");
        }
    } else if (p.kind == "constant") {
        p.value = s.real("value", 0.0);
    } else if (p.kind == "designed") {
        parse_design_input(s, p.design);
    } else {
        throw ConfigError("system.potential.type: unknown potential '" + p.kind +
                          "' (circular, quadratic, constant, designed)");
    }
    s.finish();
    return p;
}

CurveSpec parse_curve(Section s) {
    CurveSpec c;
    c.kind = s.text("type", "");
    if (c.kind == "file") {
        c.file = s.text("file", "");
    } else if (c.kind == "line") {
        c.from = s.vector("from");
        c.to = s.vector("to", static_cast<std::size_t>(c.from.size()));
        c.points = s.count("points", c.points, 5);
    } else if (c.kind == "geodesic") {
        c.origin = s.vector("origin", Vector(Vector::Zero(2)));
        c.direction = s.vector("direction", static_cast<std::size_t>(c.origin.size()));
        c.half_length = s.positive("half_length", c.half_length);
        c.step = s.positive("step", c.step);
    } else {
        throw ConfigError(s.where("type") + ": unknown curve type '" + c.kind + "' (file, line, geodesic)");
    }
    s.finish();
    return c;
}

std::vector<double> positive_list(Section& s, const std::string& key, bool required) {
    if (required && !s.has(key)) {
        throw ConfigError(s.where(key) + ": required");
    }
    auto v = s.reals(key);
    for (double x : v) {
        if (!(x > 0.0)) {
            throw ConfigError(s.where(key) + ": entries must be positive");
        }
    }
    return v;
}

void parse_parameters(Scenario& sc, Section p, const fs::path& base) {
    const std::size_t dim = sc.metric.kind == "grid" ? 2 : sc.metric.dim;
    const std::string& e = sc.experiment;
    if (e == "simulate") {
        auto& sp = sc.simulate;
        if (p.has("initial_states")) {
            const YAML::Node list = p.raw("initial_states");
            if (!list.IsSequence()) {
                throw ConfigError(p.where("initial_states") + ": expected a list");
            }
            for (std::size_t i = 0; i < list.size(); ++i) {
                Section st(list[i], p.where("initial_states") + "[" + std::to_string(i) + "]");
                sp.starts.push_back({st.vector("q", dim), st.vector("qdot", Vector(Vector::Zero(static_cast<Eigen::Index>(dim))))});
                st.finish();
            }
        } else {
            p.raw("initial_states");
        }
        if (p.has("rest_starts")) {
            const YAML::Node list = p.raw("rest_starts");
            if (!list.IsSequence()) {
                throw ConfigError(p.where("rest_starts") + ": expected a list");
            }
            for (std::size_t i = 0; i < list.size(); ++i) {
                Section st(list[i], p.where("rest_starts") + "[" + std::to_string(i) + "]");
                sp.rest_starts.push_back({st.positive("energy", 0.0), st.real("angle")});
                st.finish();
            }
            if (dim != 2) {
                throw ConfigError(p.where("rest_starts") + ": needs a two-dimensional system");
            }
        } else {
            p.raw("rest_starts");
        }
        if (sp.starts.empty() && sp.rest_starts.empty()) {
            throw ConfigError(p.where() + ": give initial_states or rest_starts");
        }
        sp.horizon = p.positive("horizon", sp.horizon);
        sp.dt = p.positive("dt", sp.dt);
        sp.tol_energy = p.positive("tol_energy", sp.tol_energy);
        sp.stride = p.count("sample_stride", sp.stride);
    } else if (e == "geodesic") {
        auto& g = sc.geodesic;
        g.origin = p.vector("origin", Vector(Vector::Zero(static_cast<Eigen::Index>(dim))));
        g.direction = p.vector("direction", static_cast<std::size_t>(g.origin.size()));
        g.normalize = p.flag("normalize_direction", g.normalize);
        g.half_length = p.positive("half_length", g.half_length);
        g.step = p.positive("step", g.step);
        g.unit_speed_tolerance = p.positive("unit_speed_tolerance", g.unit_speed_tolerance);
        g.chart_halfwidth = p.positive("chart_halfwidth", g.chart_halfwidth);
        g.min_determinant = p.positive("min_determinant", g.min_determinant);
        g.grid_resolution = p.positive("grid_resolution", g.grid_resolution);
    } else if (e == "linearize") {
        sc.linearize.equilibrium = p.vector("equilibrium", Vector(Vector::Zero(static_cast<Eigen::Index>(dim))));
    } else if (e == "modes-find") {
        auto& m = sc.modes_find;
        m.energies = positive_list(p, "energies", true);
        if (p.has("seeds")) {
            const YAML::Node n = p.raw("seeds");
            if (n.IsScalar() && n.Scalar() == "linear") {
            } else {
                m.seeds = Section::to_reals(n, p.where("seeds"));
            }
        } else {
            p.raw("seeds");
        }
        auto& o = m.search;
        o.horizon = p.positive("horizon", o.horizon);
        o.search_horizon = p.positive("search_horizon", o.search_horizon);
        o.dt = p.positive("dt", o.dt);
        o.bracket = p.positive("bracket", o.bracket);
        o.scan_points = p.count("scan_points", o.scan_points, 0);
        o.angle_tolerance = p.positive("angle_tolerance", o.angle_tolerance);
        o.polish_bracket = p.non_negative("polish_bracket", o.polish_bracket);
        o.polish_tolerance = p.positive("polish_tolerance", o.polish_tolerance);
        o.energy_drift_tolerance = p.positive("tol_energy", o.energy_drift_tolerance);
        o.min_periodicity = p.real("min_periodicity", o.min_periodicity);
        o.center = p.vector("center", Vector(Vector::Zero(2)));
        m.verify_tolerance = p.positive("verify_tolerance", m.verify_tolerance);
        m.write_trajectories = p.flag("write_trajectories", m.write_trajectories);
        m.trajectory_stride = p.count("trajectory_stride", m.trajectory_stride);
        if (dim != 2) {
            throw ConfigError("modes-find: needs a two-dimensional system");
        }
    } else if (e == "modes-verify") {
        auto& m = sc.modes_verify;
        const YAML::Node list = p.raw("curves");
        if (!list || !list.IsSequence() || list.size() == 0) {
            throw ConfigError(p.where("curves") + ": expected a non-empty list of curves");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            m.curves.push_back(parse_curve(Section(list[i], p.where("curves") + "[" + std::to_string(i) + "]")));
        }
        m.tolerance = p.positive("tolerance", m.tolerance);
    } else if (e == "design") {
        auto& d = sc.design;
        parse_design_input(p, d.input);
        d.energies = positive_list(p, "energies", false);
        d.periods = p.positive("periods", d.periods);
        d.dt = p.positive("dt", d.dt);
        d.tol_energy = p.positive("tol_energy", d.tol_energy);
        d.verify_tolerance = p.positive("verify_tolerance", d.verify_tolerance);
        d.integrability_tolerance = p.positive("integrability_tolerance", d.integrability_tolerance);
        d.path_tolerance = p.positive("path_tolerance", d.path_tolerance);
        d.deviation_limit = p.positive("deviation_limit", d.deviation_limit);
        d.level_tolerance = p.positive("level_tolerance", d.level_tolerance);
        d.definiteness_tolerance = p.non_negative("definiteness_tolerance", d.definiteness_tolerance);
        d.definiteness_spacing = p.positive("definiteness_spacing", d.definiteness_spacing);
        d.grid_stride = p.count("grid_stride", d.grid_stride);
        d.trajectory_stride = p.count("trajectory_stride", d.trajectory_stride);
        if (dim != 2) {
            throw ConfigError("design: needs a two-dimensional metric");
        }
    } else if (e == "invariance") {
        auto& v = sc.invariance;
        v.curve = parse_curve(p.section("curve"));
        v.scales = positive_list(p, "scales", false);
        if (v.scales.empty()) {
            v.scales = {0.5, 1.0, 2.0};
        }
        v.options.dt = p.positive("dt", v.options.dt);
        v.options.horizon = p.positive("horizon", v.options.horizon);
        v.options.energy_drift_tolerance = p.positive("tol_energy", v.options.energy_drift_tolerance);
        v.options.probe_points = p.count("probe_points", v.options.probe_points);
    }
    p.finish();
    for (auto* c : {&sc.invariance.curve}) {
        if (c->kind == "file") {
            c->file = resolve(base, c->file.string());
        }
    }
    for (auto& c : sc.modes_verify.curves) {
        if (c.kind == "file") {
            c.file = resolve(base, c.file.string());
        }
    }
    for (const auto* c : {&sc.invariance.curve}) {
        if (c->kind == "file" && !fs::is_regular_file(c->file)) {
            throw ConfigError("curve file '" + c->file.string() + "' not found");
        }
    }
    for (const auto& c : sc.modes_verify.curves) {
        if (c.kind == "file" && !fs::is_regular_file(c.file)) {
            throw ConfigError("curve file '" + c.file.string() + "' not found");
        }
    }
}

Scenario parse_scenario(std::string_view text, const fs::path& base, const RunOptions& options) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    if (!root.IsMap()) {
        throw ConfigError("configuration must be a mapping with keys experiment, system, parameters, output");
    }
    Section top(root, "");
    Scenario sc;
    sc.echo = YAML::Clone(root);
    sc.experiment = top.text("experiment", options.experiment.value_or(""));
    if (sc.experiment.empty()) {
        throw ConfigError("experiment: required (one of simulate, geodesic, linearize, modes-find, modes-verify, "
                          "design, invariance)");
    }
    if (std::find(std::begin(kExperiments), std::end(kExperiments), sc.experiment) == std::end(kExperiments)) {
        throw ConfigError("experiment: unknown experiment '" + sc.experiment + "'");
    }
    if (options.experiment && *options.experiment != sc.experiment) {
        throw ConfigError("experiment: configuration declares '" + sc.experiment + "' but the subcommand runs '" +
                          *options.experiment + "'");
    }
    sc.output = top.text("output", "out/" + sc.experiment);
    {
        Section sys = top.section("system");
        sc.metric = parse_metric(sys.raw("metric"), base);
        if (sys.has("potential")) {
            sc.potential = parse_potential(sys.raw("potential"));
        } else {
            sys.raw("potential");
        }
        sys.finish();
    }
    const std::size_t dim = sc.metric.kind == "grid" ? 2 : sc.metric.dim;
    if (sc.potential) {
        const auto& p = *sc.potential;
        if (p.kind == "quadratic" && static_cast<std::size_t>(p.stiffness.size()) != dim) {
            throw ConfigError("system.potential.stiffness: expected " + std::to_string(dim) + " entries");
        }
        if (p.kind == "designed" && dim != 2) {
            throw ConfigError("system.potential: a designed potential needs a two-dimensional metric");
        }
    }
    const bool needs_potential = sc.experiment == "simulate" || sc.experiment == "linearize" ||
                                 sc.experiment == "modes-find" || sc.experiment == "modes-verify" ||
                                 sc.experiment == "invariance";
    if (needs_potential && !sc.potential) {
        throw ConfigError("system.potential: required for " + sc.experiment);
    }
    if (sc.experiment == "design" && sc.potential) {
        throw ConfigError("system.potential: the design experiment builds its own potential; remove this key");
    }
    parse_parameters(sc, top.section("parameters"), base);
    top.finish();

    if (options.dt) {
        if (!(*options.dt > 0.0)) {
            throw ConfigError("--dt: must be positive");
        }
        sc.simulate.dt = sc.modes_find.search.dt = sc.design.dt = sc.invariance.options.dt = *options.dt;
    }
    if (options.tol_energy) {
        if (!(*options.tol_energy > 0.0)) {
            throw ConfigError("--tol-energy: must be positive");
        }
        sc.simulate.tol_energy = sc.modes_find.search.energy_drift_tolerance = sc.design.tol_energy =
            sc.invariance.options.energy_drift_tolerance = *options.tol_energy;
    }
    if (options.out_dir) {
        sc.output = *options.out_dir;
    }
    return sc;
}

// ---------------------------------------------------------------------------
// system construction

MetricField read_grid_metric(const fs::path& file) {
    const CsvTable t = read_csv(file);
    const std::size_t c1 = t.column("q1");
    const std::size_t c2 = t.column("q2");
    const std::size_t c11 = t.column("g11");
    const std::size_t c12 = t.column("g12");
    const std::size_t c22 = t.column("g22");
    std::vector<double> u1;
    std::vector<double> u2;
    for (const auto& r : t.rows) {
        u1.push_back(r[c1]);
        u2.push_back(r[c2]);
    }
    auto uniq = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    u1 = uniq(u1);
    u2 = uniq(u2);
    if (u1.size() < 4 || u2.size() < 4 || u1.size() * u2.size() != t.rows.size()) {
        throw ConfigError("metric grid '" + file.string() + "': expected a full rectangular lattice of at least 4x4 nodes");
    }
    auto axis = [&](const std::vector<double>& u, const char* name) {
        const double h = (u.back() - u.front()) / static_cast<double>(u.size() - 1);
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (std::abs(u[i] - (u.front() + h * static_cast<double>(i))) > 1e-9 * (1.0 + std::abs(u[i]))) {
                throw ConfigError("metric grid '" + file.string() + "': " + name + " is not evenly spaced");
            }
        }
        return GridAxis{u.front(), h, u.size()};
    };
    const GridAxis a1 = axis(u1, "q1");
    const GridAxis a2 = axis(u2, "q2");
    Matrix g11(a1.count, a2.count);
    Matrix g12(a1.count, a2.count);
    Matrix g22(a1.count, a2.count);
    for (const auto& r : t.rows) {
        const auto i = static_cast<Eigen::Index>(std::lround((r[c1] - a1.origin) / a1.spacing));
        const auto j = static_cast<Eigen::Index>(std::lround((r[c2] - a2.origin) / a2.spacing));
        g11(i, j) = r[c11];
        g12(i, j) = r[c12];
        g22(i, j) = r[c22];
    }
    return tabulated_metric(a1, a2, g11, g12, g22, file.filename().string());
}

MetricField build_metric(const MetricSpec& m) {
    if (m.kind == "double_pendulum") {
        return double_pendulum_metric();
    }
    if (m.kind == "euclidean") {
        return euclidean_metric(m.dim);
    }
    if (m.kind == "constant") {
        return constant_metric(m.constant);
    }
    return read_grid_metric(m.grid);
}

struct System {
    MetricField metric;
    PotentialField potential;
    std::optional<DesignedSystem> design;
};

System build_system(const Scenario& sc) {
    System s;
    s.metric = build_metric(sc.metric);
    if (!sc.potential) {
        return s;
    }
    const auto& p = *sc.potential;
    if (p.kind == "circular") {
        s.potential = circular_potential(p.k0, s.metric.dim());
    } else if (p.kind == "quadratic") {
        s.potential = quadratic_potential(p.stiffness);
    } else if (p.kind == "constant") {
        s.potential = constant_potential(s.metric.dim(), p.value);
    } else {
        s.design = design_system(s.metric, p.design);
        s.potential = s.design->potential;
    }
    return s;
}

std::vector<Vector> build_curve(const CurveSpec& c, const MetricField& metric) {
    std::vector<Vector> pts;
    if (c.kind == "line") {
        for (std::size_t i = 0; i < c.points; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(c.points - 1);
            pts.push_back(c.from + t * (c.to - c.from));
        }
    } else if (c.kind == "geodesic") {
        pts = shoot_geodesic_two_sided(metric, c.origin, c.direction, c.half_length, c.step).points();
    } else {
        const CsvTable t = read_csv(c.file);
        std::vector<std::size_t> cols;
        for (std::size_t k = 1; k <= metric.dim(); ++k) {
            cols.push_back(t.column("q" + std::to_string(k)));
        }
        for (const auto& r : t.rows) {
            Vector q(static_cast<Eigen::Index>(cols.size()));
            for (std::size_t k = 0; k < cols.size(); ++k) {
                q[static_cast<Eigen::Index>(k)] = r[cols[k]];
            }
            pts.push_back(q);
        }
    }
    if (!pts.empty() && static_cast<std::size_t>(pts[0].size()) != metric.dim()) {
        throw ConfigError("curve dimension does not match the metric");
    }
    return pts;
}

// ---------------------------------------------------------------------------
// execution helpers

/// Runs f(0..n-1) on up to `jobs` threads; results keep their index order and
/// the lowest-index failure is rethrown, so the outcome never depends on jobs.
template <class F>
auto parallel_map(std::size_t n, std::size_t jobs, F f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(jobs, 1), n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

struct OutputFile {
    std::string name;
    std::string contents;
};

class Report {
public:
    Report() { em_ << YAML::BeginMap; }
    void key(const std::string& k) { em_ << YAML::Key << k << YAML::Value; }
    void num(const std::string& k, double v) {
        key(k);
        em_ << number(v);
    }
    void count(const std::string& k, std::size_t v) {
        key(k);
        em_ << v;
    }
    void text(const std::string& k, const std::string& v) {
        key(k);
        em_ << v;
    }
    void boolean(const std::string& k, bool v) {
        key(k);
        em_ << v;
    }
    void vec(const std::string& k, const Vector& v) {
        key(k);
        em_ << YAML::Flow << YAML::BeginSeq;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            em_ << number(v[i]);
        }
        em_ << YAML::EndSeq;
    }
    void list(const std::string& k, const std::vector<double>& v) {
        vec(k, Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    void node(const std::string& k, const YAML::Node& n) {
        key(k);
        em_ << n;
    }
    void begin_map(const std::string& k) {
        key(k);
        em_ << YAML::BeginMap;
    }
    void begin_map() { em_ << YAML::BeginMap; }
    void end_map() { em_ << YAML::EndMap; }
    void begin_seq(const std::string& k) {
        key(k);
        em_ << YAML::BeginSeq;
    }
    void end_seq() { em_ << YAML::EndSeq; }
    std::string finish() {
        em_ << YAML::EndMap;
        return std::string(em_.c_str()) + "\n";
    }

    static std::string number(double v) {
        if (std::isnan(v)) {
            return ".nan";
        }
        if (std::isinf(v)) {
            return v > 0 ? ".inf" : "-.inf";
        }
        return format_double(v);
    }

private:
    YAML::Emitter em_;
};

std::string trajectory_csv(const Trajectory& traj, std::size_t stride) {
    Trajectory thin;
    thin.dt = traj.dt;
    for (std::size_t k = 0; k < traj.size(); k += stride) {
        thin.samples.push_back(traj.samples[k]);
        thin.energies.push_back(traj.energies[k]);
    }
    if (stride > 1 && (traj.size() - 1) % stride != 0) {
        thin.samples.push_back(traj.samples.back());
        thin.energies.push_back(traj.energies.back());
    }
    std::ostringstream os;
    write_trajectory_csv(os, thin);
    return os.str();
}

std::string indexed(const std::string& stem, std::size_t i, const std::string& ext = ".csv") {
    return stem + "_" + std::to_string(i) + ext;
}

/// Largest gap between a velocity zero crossing of one coordinate and the
/// nearest crossing of the other, over crossings up to t_end.
double crossing_mismatch(const Trajectory& traj, double t_end) {
    auto all = [&](std::size_t c) {
        const auto x = velocity_zero_crossings(traj, c);
        std::vector<double> t(x.rising);
        t.insert(t.end(), x.falling.begin(), x.falling.end());
        std::sort(t.begin(), t.end());
        std::erase_if(t, [&](double v) { return v > t_end; });
        return t;
    };
    const auto a = all(0);
    const auto b = all(1);
    if (a.empty() || b.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    auto nearest = [](const std::vector<double>& v, double t) {
        const auto it = std::lower_bound(v.begin(), v.end(), t);
        double d = std::numeric_limits<double>::infinity();
        if (it != v.end()) {
            d = std::min(d, std::abs(*it - t));
        }
        if (it != v.begin()) {
            d = std::min(d, std::abs(*std::prev(it) - t));
        }
        return d;
    };
    for (double t : a) {
        worst = std::max(worst, nearest(b, t));
    }
    for (double t : b) {
        worst = std::max(worst, nearest(a, t));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// experiments

struct Outcome {
    std::vector<OutputFile> files;
    bool breach = false;
    std::string breach_message;
};

void run_simulate(const Scenario& sc, const System& sys, std::size_t jobs, Report& rep, Outcome& out) {
    const auto& p = sc.simulate;
    std::vector<State> starts;
    for (const auto& s : p.starts) {
        starts.push_back(State{s.q, s.qdot, 0.0});
    }
    for (const auto& r : p.rest_starts) {
        const ChartPoint q = equipotential_point(sys.potential, r.energy, r.angle);
        starts.push_back(State{q, Vector::Zero(q.size()), 0.0});
    }
    const IntegrationOptions io{p.tol_energy};
    const auto runs = parallel_map(starts.size(), jobs, [&](std::size_t i) {
        return integrate(sys.metric, sys.potential, starts[i], p.horizon, p.dt, io);
    });
    rep.begin_seq("runs");
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& tr = runs[i];
        const std::string file = indexed("trajectory", i);
        out.files.push_back({file, trajectory_csv(tr, p.stride)});
        rep.begin_map();
        rep.text("file", file);
        rep.vec("q0", starts[i].q);
        rep.vec("qdot0", starts[i].qdot);
        rep.num("energy", tr.energies.front());
        rep.num("final_energy", tr.energies.back());
        rep.num("relative_energy_drift", tr.max_relative_energy_drift());
        rep.count("samples", tr.size());
        for (std::size_t c = 0; c < tr.dim(); ++c) {
            try {
                const auto pe = detect_period(tr, c);
                rep.begin_map("period_q" + std::to_string(c + 1));
                rep.num("mean", pe.period);
                rep.num("standard_deviation", pe.standard_deviation);
                rep.count("crossings", pe.crossings);
                rep.end_map();
            } catch (const InvalidArgument&) {
                rep.text("period_q" + std::to_string(c + 1), "undetected");
            }
        }
        rep.end_map();
    }
    rep.end_seq();
}

void run_geodesic(const Scenario& sc, const System& sys, Report& rep, Outcome& out) {
    const auto& p = sc.geodesic;
    ShootOptions so;
    so.normalize_initial_velocity = p.normalize;
    so.unit_speed_tolerance = p.unit_speed_tolerance;
    const GeodesicCurve curve = shoot_geodesic_two_sided(sys.metric, p.origin, p.direction, p.half_length, p.step, so);
    std::ostringstream gcsv;
    write_geodesic_csv(gcsv, curve);
    out.files.push_back({"geodesic.csv", gcsv.str()});
    const auto res = geodesic_residuals(sys.metric, curve);
    double speed_dev = 0.0;
    const double speed0 = metric_norm(sys.metric, curve.samples()[0].q, curve.samples()[0].w);
    for (const auto& smp : curve.samples()) {
        speed_dev = std::max(speed_dev, std::abs(inner_product(sys.metric, smp.q, smp.w, smp.w) - speed0 * speed0));
    }
    rep.num("s_min", curve.s_min());
    rep.num("s_max", curve.s_max());
    rep.count("samples", curve.size());
    rep.num("max_geodesic_residual", *std::max_element(res.begin(), res.end()));
    rep.num("max_speed_deviation", speed_dev);
    rep.vec("end_backward", curve.samples().front().q);
    rep.vec("end_forward", curve.samples().back().q);
    if (sys.metric.dim() == 2) {
        const GeodesicChart chart = geodesic_chart(curve, p.chart_halfwidth, p.min_determinant);
        std::ostringstream ccsv;
        write_chart_grid_csv(ccsv, chart, p.grid_resolution);
        out.files.push_back({"chart_grid.csv", ccsv.str()});
        rep.begin_map("chart");
        rep.num("xi1_min", chart.domain().xi1_min);
        rep.num("xi1_max", chart.domain().xi1_max);
        rep.num("halfwidth", chart.domain().halfwidth);
        rep.end_map();
    }
}

void run_linearize(const Scenario& sc, const System& sys, Report& rep) {
    const auto modes = linearized_modes(sys.metric, sys.potential, sc.linearize.equilibrium);
    rep.vec("equilibrium", sc.linearize.equilibrium);
    rep.begin_seq("modes");
    for (const auto& m : modes) {
        rep.begin_map();
        rep.num("omega", m.omega);
        rep.num("period", 2.0 * std::numbers::pi / m.omega);
        rep.vec("direction", m.direction);
        rep.vec("g_normalized", m.g_normalized);
        if (m.direction.size() == 2) {
            rep.num("angle", std::atan2(m.direction[1], m.direction[0]));
        }
        rep.end_map();
    }
    rep.end_seq();
}

struct ModeJob {
    std::size_t energy_index = 0;
    std::size_t family = 0;
    double energy = 0.0;
    double seed = 0.0;
};

void run_modes_find(const Scenario& sc, const System& sys, std::size_t jobs, Report& rep, Outcome& out) {
    const auto& p = sc.modes_find;
    std::vector<double> seeds = p.seeds;
    if (seeds.empty()) {
        for (const auto& m : linearized_modes(sys.metric, sys.potential, p.search.center)) {
            seeds.push_back(std::atan2(m.direction[1], m.direction[0]));
        }
    }
    std::vector<ModeJob> work;
    for (std::size_t e = 0; e < p.energies.size(); ++e) {
        for (std::size_t f = 0; f < seeds.size(); ++f) {
            work.push_back({e, f, p.energies[e], seeds[f]});
        }
    }
    struct Found {
        ModeCandidate mode;
        StrictModeReport verify;
        std::optional<PeriodEstimate> period;
    };
    const auto found = parallel_map(work.size(), jobs, [&](std::size_t i) {
        Found r;
        r.mode = find_mode(sys.metric, sys.potential, work[i].energy, work[i].seed, p.search);
        r.verify = verify_strict_mode(sys.metric, sys.potential, r.mode.curve, p.verify_tolerance);
        try {
            r.period = detect_period(r.mode.trajectory, 0);
        } catch (const InvalidArgument&) {
        }
        return r;
    });
    rep.list("seeds", seeds);
    rep.begin_seq("modes");
    for (std::size_t i = 0; i < work.size(); ++i) {
        const auto& w = work[i];
        const auto& f = found[i];
        const std::string stem = "mode_e" + std::to_string(w.energy_index) + "_f" + std::to_string(w.family);
        std::ostringstream csv;
        write_mode_curve_csv(csv, sys.metric, f.mode.curve);
        out.files.push_back({stem + ".csv", csv.str()});
        if (p.write_trajectories) {
            out.files.push_back({stem + "_trajectory.csv", trajectory_csv(f.mode.trajectory, p.trajectory_stride)});
        }
        const Vector& turn = f.mode.curve.back();
        rep.begin_map();
        rep.num("energy", w.energy);
        rep.count("family", w.family);
        rep.num("seed", w.seed);
        rep.num("theta", f.mode.theta);
        rep.vec("start", f.mode.start);
        rep.vec("turn", turn);
        rep.num("start_level_error", std::abs(sys.potential.value(f.mode.start) + w.energy));
        rep.num("turn_level_error", std::abs(sys.potential.value(turn) + w.energy));
        rep.num("turning_kinetic_energy", f.mode.turning_kinetic_energy);
        rep.num("periodicity", f.mode.periodicity);
        rep.num("relative_energy_drift", f.mode.trajectory.max_relative_energy_drift());
        if (f.period) {
            rep.num("period", f.period->period);
            rep.num("period_standard_deviation", f.period->standard_deviation);
        } else {
            rep.text("period", "undetected");
        }
        rep.count("evaluations", f.mode.evaluations);
        rep.num("max_geodesic_residual", f.verify.max_geodesic_residual);
        rep.num("max_tangency_residual", f.verify.max_tangency_residual);
        rep.num("curve_length", f.verify.s.empty() ? 0.0 : f.verify.s.back());
        rep.boolean("strict", f.verify.strict);
        rep.text("curve_file", stem + ".csv");
        rep.end_map();
    }
    rep.end_seq();
}

void run_modes_verify(const Scenario& sc, const System& sys, Report& rep, Outcome& out) {
    const auto& p = sc.modes_verify;
    rep.begin_seq("curves");
    for (std::size_t i = 0; i < p.curves.size(); ++i) {
        const auto pts = build_curve(p.curves[i], sys.metric);
        const auto r = verify_strict_mode(sys.metric, sys.potential, pts, p.tolerance);
        std::string csv = "s,geodesic_residual,tangency_residual\n";
        for (std::size_t k = 0; k < r.s.size(); ++k) {
            const double row[] = {r.s[k], r.geodesic_residual[k], r.tangency_residual[k]};
            csv += csv_row(row) + "\n";
        }
        const std::string file = indexed("residuals", i);
        out.files.push_back({file, csv});
        rep.begin_map();
        rep.text("type", p.curves[i].kind);
        rep.count("points", pts.size());
        rep.num("length", r.s.back());
        rep.num("max_geodesic_residual", r.max_geodesic_residual);
        rep.num("max_tangency_residual", r.max_tangency_residual);
        rep.num("tolerance", r.tolerance);
        rep.boolean("strict", r.strict);
        rep.text("file", file);
        rep.end_map();
    }
    rep.end_seq();
}

struct EnergyRun {
    double energy = 0.0;
    Trajectory trajectory;
    double predicted_period = 0.0;
    std::optional<PeriodEstimate> period;
    double max_deviation = 0.0;
    std::vector<TurningPoint> turns;
    double max_level_error = 0.0;
    double crossing_mismatch = 0.0;
    double max_speed_error = 0.0;
    std::string speed_csv;
};

EnergyRun simulate_designed(const MetricField& metric, const DesignedSystem& ds, const DesignParams& p, double energy) {
    EnergyRun r;
    r.energy = energy;
    const GeodesicChart& chart = *ds.chart;
    const auto& geo = chart.geodesic();
    const double lo = chart.domain().xi1_min;
    const double hi = chart.domain().xi1_max;
    const Polynomial alpha = p.input.alpha;
    const SpeedLaw law = speed_law_solve([alpha](double s) { return alpha(s); }, energy, lo, hi,
                                         std::min(1e-3, p.input.geodesic_step));
    r.predicted_period = law.period();

    const Vector q0 = chart.forward(Vector::Zero(2));
    const auto point = geo.at(0.0);
    const double speed = std::sqrt(2.0 * (energy + ds.potential.value(q0)));
    const State s0{q0, speed * point.tangent / metric_norm(metric, q0, point.tangent), 0.0};
    r.trajectory = integrate(metric, ds.potential, s0, p.periods * r.predicted_period, p.dt,
                             IntegrationOptions{p.tol_energy});

    const auto polyline = geo.points();
    for (const auto& smp : r.trajectory.samples) {
        r.max_deviation = std::max(r.max_deviation, metric_distance_to_polyline(metric, polyline, smp.q));
    }
    r.turns = turning_points(metric, ds.potential, r.trajectory);
    for (const auto& t : r.turns) {
        r.max_level_error = std::max(r.max_level_error, std::abs(t.potential + energy));
    }
    try {
        r.period = detect_period(r.trajectory, 0);
    } catch (const InvalidArgument&) {
    }
    r.crossing_mismatch = crossing_mismatch(r.trajectory, r.trajectory.samples.back().t);

    // speed along the geodesic against the speed law, up to the first turn
    const double t_turn = r.turns.empty() ? r.trajectory.samples.back().t : r.turns.front().t;
    std::ostringstream csv;
    csv << "t,s,speed,speed_law\n";
    for (const auto& smp : r.trajectory.samples) {
        if (smp.t >= t_turn) {
            break;
        }
        const double s = chart.inverse(smp.q)[0];
        const double measured = metric_norm(metric, smp.q, smp.qdot);
        const double predicted = law.beta(s);
        if (std::isfinite(predicted)) {
            r.max_speed_error = std::max(r.max_speed_error, std::abs(measured - predicted));
        }
        const double row[] = {smp.t, s, measured, predicted};
        csv << csv_row(row) << '\n';
    }
    r.speed_csv = csv.str();
    return r;
}

void run_design(const Scenario& sc, const System& sys, std::size_t jobs, Report& rep, Outcome& out) {
    const auto& p = sc.design;
    const DesignedSystem ds = design_system(sys.metric, p.input);
    const GeodesicChart& chart = *ds.chart;

    const auto lattice = chart_lattice_points(chart, p.definiteness_spacing);
    const auto definite = definiteness_check(ds.potential, lattice, p.definiteness_tolerance, p.input.origin);

    std::vector<Vector> on_geodesic;
    for (const auto& smp : chart.geodesic().samples()) {
        if (chart.domain().contains(Vector{{smp.s, 0.0}}, 0.0)) {
            on_geodesic.push_back(smp.q);
        }
    }
    const auto strict = verify_strict_mode(sys.metric, ds.potential, on_geodesic, p.verify_tolerance);

    {
        std::ostringstream os;
        write_geodesic_csv(os, chart.geodesic());
        out.files.push_back({"geodesic.csv", os.str()});
    }
    {
        std::ostringstream os;
        write_chart_grid_csv(os, chart, 0.1);
        out.files.push_back({"chart_grid.csv", os.str()});
    }
    {
        std::ostringstream os;
        write_potential_grid_csv(os, *ds.potential_xi, chart, p.grid_stride);
        out.files.push_back({"potential_grid.csv", os.str()});
    }
    {
        std::ostringstream os;
        write_force_field_csv(os, ds.potential_xi->field(), p.grid_stride);
        out.files.push_back({"force_field.csv", os.str()});
    }

    const auto runs = parallel_map(p.energies.size(), jobs, [&](std::size_t i) {
        return simulate_designed(sys.metric, ds, p, p.energies[i]);
    });

    std::vector<std::string> failures;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) {
            failures.push_back(what);
        }
        return ok;
    };

    rep.begin_map("certification");
    rep.begin_map("chart");
    rep.num("xi1_min", chart.domain().xi1_min);
    rep.num("xi1_max", chart.domain().xi1_max);
    rep.num("halfwidth", chart.domain().halfwidth);
    rep.end_map();
    rep.num("integrability_residual", ds.integrability);
    rep.boolean("integrability_pass", check(ds.integrability < p.integrability_tolerance, "integrability"));
    rep.num("path_difference", ds.potential_xi->path_difference());
    rep.boolean("path_pass", check(ds.potential_xi->path_difference() < p.path_tolerance, "path independence"));
    rep.num("beta_epsilon", ds.bound.epsilon);
    rep.num("beta_bound", ds.bound.overall);
    rep.num("beta_margin", ds.beta_margin);
    rep.count("beta_undefined_cells", ds.bound.undefined_cells.size());
    rep.boolean("beta_pass", check(ds.beta_margin > 0.0, "beta bound"));
    rep.begin_map("definiteness");
    rep.boolean("pass", check(definite.pass, "negative definiteness"));
    rep.num("tolerance", p.definiteness_tolerance);
    rep.num("worst_margin", definite.worst_margin);
    rep.vec("worst_point", definite.worst_point);
    rep.vec("maximizer", definite.maximizer);
    rep.count("samples", definite.samples);
    rep.count("skipped", definite.skipped);
    rep.end_map();
    rep.num("max_geodesic_residual", strict.max_geodesic_residual);
    rep.num("max_tangency_residual", strict.max_tangency_residual);
    rep.boolean("strict_pass", check(strict.strict, "strict-mode residuals"));
    rep.end_map();

    rep.begin_seq("runs");
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        const std::string traj_file = indexed("trajectory", i);
        const std::string speed_file = indexed("speed", i);
        out.files.push_back({traj_file, trajectory_csv(r.trajectory, p.trajectory_stride)});
        out.files.push_back({speed_file, r.speed_csv});
        std::string turns_csv = "t,q1,q2,kinetic,f\n";
        for (const auto& t : r.turns) {
            const double row[] = {t.t, t.q[0], t.q[1], t.kinetic, t.potential};
            turns_csv += csv_row(row) + "\n";
        }
        const std::string turns_file = indexed("turning_points", i);
        out.files.push_back({turns_file, turns_csv});
        const std::string tag = "E = " + format_double(r.energy);
        rep.begin_map();
        rep.num("energy", r.energy);
        rep.num("horizon", r.trajectory.samples.back().t);
        rep.num("relative_energy_drift", r.trajectory.max_relative_energy_drift());
        rep.num("max_deviation", r.max_deviation);
        rep.boolean("deviation_pass", check(r.max_deviation < p.deviation_limit, "geodesic deviation at " + tag));
        rep.count("turning_points", r.turns.size());
        rep.num("max_turning_level_error", r.max_level_error);
        rep.boolean("turning_level_pass",
                    check(!r.turns.empty() && r.max_level_error < p.level_tolerance, "turning levels at " + tag));
        rep.num("speed_law_period", r.predicted_period);
        if (r.period) {
            rep.num("period", r.period->period);
            rep.num("period_standard_deviation", r.period->standard_deviation);
        } else {
            rep.text("period", "undetected");
        }
        rep.num("velocity_crossing_mismatch", r.crossing_mismatch);
        rep.num("max_speed_law_error", r.max_speed_error);
        rep.text("trajectory_file", traj_file);
        rep.text("speed_file", speed_file);
        rep.text("turning_points_file", turns_file);
        rep.end_map();
    }
    rep.end_seq();

    if (!failures.empty()) {
        out.breach = true;
        out.breach_message = "certification failed:";
        for (const auto& f : failures) {
            out.breach_message += " " + f + ";";
        }
        out.breach_message.pop_back();
    }
}

void run_invariance(const Scenario& sc, const System& sys, Report& rep) {
    const auto& p = sc.invariance;
    const auto pts = build_curve(p.curve, sys.metric);
    const auto results = scaling_invariance_test(sys.metric, sys.potential, pts, p.scales, p.options);
    rep.text("curve", p.curve.kind);
    rep.count("points", pts.size());
    rep.begin_seq("scales");
    for (const auto& r : results) {
        rep.begin_map();
        rep.num("scale", r.scale);
        rep.num("max_deviation", r.max_deviation);
        rep.num("normal_acceleration", r.normal_acceleration);
        rep.boolean("ratio_defined", r.ratio_defined);
        rep.num("normal_acceleration_ratio", r.normal_acceleration_ratio);
        rep.end_map();
    }
    rep.end_seq();
}

std::string system_description(const Scenario& sc) {
    std::string s = sc.metric.kind;
    if (sc.potential) {
        s += " / " + sc.potential->kind;
    }
    return s;
}

RunResult execute(const Scenario& sc, const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
    const System sys = build_system(sc);

    Report rep;
    rep.text("toolkit", std::string(kToolkitVersion));
    rep.text("experiment", sc.experiment);
    rep.text("system", system_description(sc));
    rep.node("scenario", sc.echo);
    if (options.dt) {
        rep.num("override_dt", *options.dt);
    }
    if (options.tol_energy) {
        rep.num("override_tol_energy", *options.tol_energy);
    }
    if (sys.design) {
        rep.begin_map("designed_potential");
        rep.num("integrability_residual", sys.design->integrability);
        rep.num("beta_margin", sys.design->beta_margin);
        rep.num("xi1_min", sys.design->chart->domain().xi1_min);
        rep.num("xi1_max", sys.design->chart->domain().xi1_max);
        rep.num("halfwidth", sys.design->chart->domain().halfwidth);
        rep.end_map();
    }

    Outcome out;
    rep.begin_map("results");
    if (sc.experiment == "simulate") {
        run_simulate(sc, sys, jobs, rep, out);
    } else if (sc.experiment == "geodesic") {
        run_geodesic(sc, sys, rep, out);
    } else if (sc.experiment == "linearize") {
        run_linearize(sc, sys, rep);
    } else if (sc.experiment == "modes-find") {
        run_modes_find(sc, sys, jobs, rep, out);
    } else if (sc.experiment == "modes-verify") {
        run_modes_verify(sc, sys, rep, out);
    } else if (sc.experiment == "design") {
        run_design(sc, sys, jobs, rep, out);
    } else {
        run_invariance(sc, sys, rep);
    }
    rep.end_map();
    rep.text("status", out.breach ? "tolerance breach" : "ok");
    if (out.breach) {
        rep.text("breach", out.breach_message);
    }
    if (options.timing) {
        rep.num("wall_clock_seconds",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        rep.count("jobs", jobs);
    }
    out.files.push_back({"report.yaml", rep.finish()});

    RunResult result;
    result.out_dir = sc.output;
    for (const auto& f : out.files) {
        const fs::path path = sc.output / f.name;
        write_file_atomic(path, f.contents);
        result.files.push_back(path);
    }
    result.exit_code = out.breach ? kExitTolerance : kExitOk;
    result.message = out.breach ? out.breach_message : "ok";
    return result;
}

RunResult failure(int code, const std::string& message) {
    RunResult r;
    r.exit_code = code;
    r.message = message;
    return r;
}

// ---------------------------------------------------------------------------
// built-in scenarios

struct BuiltIn {
    const char* id;
    const char* description;
    const char* text;
};

constexpr BuiltIn kBuiltIns[] = {
    {"paper-3-1",
     "double pendulum with a spring of 100 Nm/rad on each joint: both mode families over energy, 200 s runs",
     R"(experiment: modes-find
output: out/paper-3-1
system:
  metric: double_pendulum
  potential: {type: circular, k0: 100}
parameters:
  energies: [0.01, 1, 5, 10, 20, 50]
  seeds: linear
  horizon: 200
  search_horizon: 5
  dt: 5.0e-4
  bracket: 0.4
  verify_tolerance: 1.0e-4
)"},
    {"paper-3-2",
     "designed potential along the geodesic through the origin (alpha = -5 xi1, beta = -47.86), runs at 1, 3 and "
     "5.63 J",
     R"(experiment: design
output: out/paper-3-2
system:
  metric: double_pendulum
parameters:
  origin: [0, 0]
  alpha: [0, -5]
  beta: -47.86
  geodesic_half_length: 1.75
  halfwidth: 0.3
  spacing: 0.01
  energies: [1, 3, 5.63]
  periods: 3
  dt: 1.0e-3
)"},
    {"necessity-probe",
     "normal acceleration of the coordinate line q2 = -q1 at scaled speeds (c^2 law)",
     R"(experiment: invariance
output: out/necessity-probe
system:
  metric: double_pendulum
  potential: {type: circular, k0: 100}
parameters:
  curve: {type: line, from: [-0.5, 0.5], to: [0.5, -0.5], points: 401}
  scales: [0.5, 1, 2]
  horizon: 1
)"},
};

}  // namespace

std::vector<ScenarioInfo> list_scenarios() {
    std::vector<ScenarioInfo> out;
    for (const auto& b : kBuiltIns) {
        out.push_back({b.id, b.description});
    }
    return out;
}

std::string scenario_config(std::string_view id) {
    for (const auto& b : kBuiltIns) {
        if (id == b.id) {
            return b.text;
        }
    }
    throw ConfigError("unknown scenario '" + std::string(id) + "'");
}

RunResult run_config_text(std::string_view text, const fs::path& base_dir, const RunOptions& options) {
    Scenario sc;
    try {
        sc = parse_scenario(text, base_dir, options);
    } catch (const ConfigError& e) {
        return failure(kExitSchema, e.what());
    } catch (const InvalidArgument& e) {
        return failure(kExitSchema, e.what());
    }
    try {
        return execute(sc, options);
    } catch (const ConfigError& e) {
        return failure(kExitSchema, e.what());
    } catch (const InvalidArgument& e) {
        return failure(kExitSchema, e.what());
    } catch (const ToleranceError& e) {
        return failure(kExitTolerance, e.what());
    } catch (const std::exception& e) {
        return failure(kExitNumerical, e.what());
    }
}

RunResult run_config_file(const fs::path& path, const RunOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return failure(kExitSchema, "cannot read configuration '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return run_config_text(ss.str(), path.has_parent_path() ? path.parent_path() : fs::path("."), options);
}

RunResult run_scenario(std::string_view id, const RunOptions& options) {
    std::string text;
    try {
        text = scenario_config(id);
    } catch (const ConfigError& e) {
        return failure(kExitSchema, e.what());
    }
    return run_config_text(text, fs::current_path(), options);
}

}  // namespace nlmodes::cli
