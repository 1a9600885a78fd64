#pragma once

#include <optional>
#include <string>
#include <vector>

namespace lsgb::cli {

enum ExitCode { Success = 0, Failure = 1, ConfigFailure = 2, SolverFailure = 3 };

/// Flags shared by every subcommand; unset values leave the config untouched.
struct GlobalOptions {
    std::string config;
    std::string out;
    std::optional<int> jobs;
    bool resume{false};
    std::optional<double> resolution;
    std::string formulation;  // merriman | zhao | hetero
    bool quiet{false};
};

int cmd_run(const GlobalOptions& g);
int cmd_sweep(const GlobalOptions& g);
int cmd_tabulate(const std::vector<double>& r_lambda, const std::vector<double>& r_gamma);
int cmd_plot(const GlobalOptions& g, const std::string& kind, const std::string& results);
int cmd_validate(const GlobalOptions& g, const std::vector<std::string>& only);

}  // namespace lsgb::cli
