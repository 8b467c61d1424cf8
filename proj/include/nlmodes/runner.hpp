#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlmodes/errors.hpp"

namespace nlmodes::cli {

/// Schema violation in a scenario file: unknown or missing key, wrong type,
/// out-of-range value, unreadable referenced file.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum ExitCode : int {
    kExitOk = 0,
    kExitSchema = 2,
    kExitNumerical = 3,
    kExitTolerance = 4,
};

inline constexpr std::string_view kToolkitVersion = "nlmodes 1.0.0";

inline constexpr std::string_view kExperiments[] = {
    "simulate", "geodesic", "linearize", "modes-find", "modes-verify", "design", "invariance",
};

struct RunOptions {
    /// overrides the scenario's `output` key when set
    std::optional<std::filesystem::path> out_dir;
    /// worker threads for independent simulations; 0 = logical cores
    std::size_t jobs = 0;
    std::optional<double> tol_energy;
    std::optional<double> dt;
    /// add wall-clock seconds to the report (off by default so reports stay byte-identical)
    bool timing = false;
    /// when set, the scenario's experiment must match (or be absent and is taken from here)
    std::optional<std::string> experiment;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string message;
    std::filesystem::path out_dir;
    /// files written, report last
    std::vector<std::filesystem::path> files;
};

struct ScenarioInfo {
    std::string id;
    std::string description;
};

[[nodiscard]] std::vector<ScenarioInfo> list_scenarios();
/// Configuration text of a built-in scenario; ConfigError for unknown ids.
[[nodiscard]] std::string scenario_config(std::string_view id);

/// Parses, validates and runs one scenario. Nothing is written unless the
/// whole configuration validates and every computation finishes; files are
/// written atomically. Input files named in the text resolve against
/// base_dir; the output directory resolves against the working directory.
[[nodiscard]] RunResult run_config_text(std::string_view text, const std::filesystem::path& base_dir,
                                        const RunOptions& options);
[[nodiscard]] RunResult run_config_file(const std::filesystem::path& path, const RunOptions& options);
[[nodiscard]] RunResult run_scenario(std::string_view id, const RunOptions& options);

}  // namespace nlmodes::cli
