#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlmodes/runner.hpp"

namespace cli = nlmodes::cli;

namespace {

struct Common {
    std::string config;
    std::string scenario;
    std::string out;
    std::size_t jobs = 0;
    std::optional<double> tol_energy;
    std::optional<double> dt;
    bool timing = false;
};

void add_common(CLI::App* app, Common& c, bool allow_scenario) {
    auto* cfg = app->add_option("--config", c.config, "scenario file (YAML)");
    if (allow_scenario) {
        auto* sc = app->add_option("--scenario", c.scenario, "built-in scenario id (see `nlmodes scenarios`)");
        cfg->excludes(sc);
    } else {
        cfg->required();
    }
    app->add_option("--out", c.out, "output directory (overrides the scenario's `output`)");
    app->add_option("--jobs", c.jobs, "worker threads; 0 = logical cores")->check(CLI::NonNegativeNumber);
    app->add_option("--tol-energy", c.tol_energy, "relative energy drift tolerance for every simulation");
    app->add_option("--dt", c.dt, "integration step for every simulation");
    app->add_flag("--timing", c.timing, "add wall-clock time to the report");
}

int launch(const Common& c, std::optional<std::string> experiment) {
    cli::RunOptions opt;
    if (!c.out.empty()) {
        opt.out_dir = c.out;
    }
    opt.jobs = c.jobs;
    opt.tol_energy = c.tol_energy;
    opt.dt = c.dt;
    opt.timing = c.timing;
    opt.experiment = std::move(experiment);

    cli::RunResult r;
    if (!c.scenario.empty()) {
        r = cli::run_scenario(c.scenario, opt);
    } else if (!c.config.empty()) {
        r = cli::run_config_file(c.config, opt);
    } else {
        std::cerr << "error: give --config PATH or --scenario ID\n";
        return cli::kExitSchema;
    }
    if (r.exit_code == cli::kExitOk) {
        std::cout << "wrote " << r.files.size() << " files to " << r.out_dir.string() << "\n";
        return 0;
    }
    if (!r.files.empty()) {
        std::cout << "wrote " << r.files.size() << " files to " << r.out_dir.string() << "\n";
    }
    const char* kind = r.exit_code == cli::kExitSchema      ? "configuration error"
                       : r.exit_code == cli::kExitTolerance ? "tolerance breach"
                                                            : "numerical failure";
    std::cerr << kind << ": " << r.message << "\n";
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear normal modes on Riemannian configuration spaces"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cli::kToolkitVersion));

    Common common;

    auto* run = app.add_subcommand("run", "run a scenario file or a built-in scenario");
    add_common(run, common, true);

    auto* scenarios = app.add_subcommand("scenarios", "list the built-in scenarios");
    std::string show;
    scenarios->add_option("--show", show, "print the configuration of one scenario");

    struct Direct {
        const char* name;
        const char* experiment;
        const char* help;
    };
    const Direct direct[] = {
        {"simulate", "simulate", "integrate the equations of motion"},
        {"geodesic", "geodesic", "shoot a geodesic and build its tubular chart"},
        {"linearize", "linearize", "linearized modes at an equilibrium"},
        {"design", "design", "construct a potential with a prescribed strict mode"},
        {"invariance", "invariance", "speed-scaling test of a curve"},
    };
    std::vector<std::pair<CLI::App*, std::string>> runners;
    for (const auto& d : direct) {
        auto* sub = app.add_subcommand(d.name, d.help);
        add_common(sub, common, false);
        runners.emplace_back(sub, d.experiment);
    }
    auto* modes = app.add_subcommand("modes", "mode search and verification");
    modes->require_subcommand(1);
    auto* find = modes->add_subcommand("find", "search periodic modes on equipotential lines");
    add_common(find, common, false);
    runners.emplace_back(find, "modes-find");
    auto* verify = modes->add_subcommand("verify", "check the strict-mode conditions along curves");
    add_common(verify, common, false);
    runners.emplace_back(verify, "modes-verify");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitSchema;
    }

    if (*scenarios) {
        if (!show.empty()) {
            try {
                std::cout << cli::scenario_config(show);
            } catch (const cli::ConfigError& e) {
                std::cerr << "configuration error: " << e.what() << "\n";
                return cli::kExitSchema;
            }
            return 0;
        }
        for (const auto& s : cli::list_scenarios()) {
            std::cout << s.id << "  " << s.description << "\n";
        }
        return 0;
    }
    if (*run) {
        return launch(common, std::nullopt);
    }
    for (const auto& [sub, experiment] : runners) {
        if (*sub) {
            return launch(common, experiment);
        }
    }
    return cli::kExitSchema;
}
