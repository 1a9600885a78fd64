#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsgb/scenarios.hpp"

namespace lsgb {

enum class ConfigKind { Garcke, Young, Circle };
std::string to_string(ConfigKind k);

/// Everything a run or sweep needs, read from one JSON file with the sections
/// grid, solver, scenario, measure, output and sweep. Spacing-dependent
/// defaults (dt, Heaviside width, band) are derived in run_options().
struct AppConfig {
    std::string source;  // file name used in diagnostics
    ConfigKind kind{ConfigKind::Garcke};
    Formulation formulation{Formulation::HeterogeneousSource};

    double h{5e-3};
    std::optional<double> dt;
    double eps_cells{2.0};
    double band_cells{20.0};
    SolverConfig solver;      // dt, eps and band are overwritten from the fields above
    MeasureConfig measure;

    GarckeScenario garcke;
    YoungScenario young;
    CircleScenario circle;

    std::string out_dir{"out"};
    int vtk_every{0};

    std::vector<SweepTuple> sweep_tuples;
    std::string sweep_preset;
    int jobs{1};

    /// Replace the spacing in every scenario (and the derived defaults).
    void set_resolution(double spacing);
    RunOptions run_options() const;
    /// Resolved parameters as pretty-printed JSON (for manifests).
    std::string resolved_json() const;
};

/// Throws ConfigError with "file:line:col" for syntax errors and the key path
/// for invalid values; WettingLimitError for energy ratios past the wetting
/// limit.
AppConfig parse_config(const std::string& text, const std::string& source = "<config>");
AppConfig load_config(const std::string& path);

}  // namespace lsgb
