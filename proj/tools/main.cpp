#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace lsgb::cli;
    CLI::App app{"Multi-phase level-set grain boundary simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", LSGB_VERSION);

    GlobalOptions g;
    int jobs = 0;
    double resolution = 0.0;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--out", g.out, "output directory");
    auto* jobs_opt = app.add_option("--jobs", jobs, "parallel sweep runs")->check(CLI::PositiveNumber);
    app.add_flag("--resume", g.resume, "skip sweep tuples already present in the results");
    auto* res_opt = app.add_option("--resolution", resolution, "grid spacing h (overrides the config)")
                        ->check(CLI::PositiveNumber);
    app.add_option("--formulation", g.formulation, "coupling formulation")
        ->check(CLI::IsMember({"merriman", "zhao", "hetero"}));
    app.add_flag("-q,--quiet", g.quiet, "no progress output");

    auto* run = app.add_subcommand("run", "run one scenario");
    auto* sweep = app.add_subcommand("sweep", "run every tuple of a sweep");

    std::vector<double> r_lambda, r_gamma;
    auto* tab = app.add_subcommand("tabulate", "analytic Garcke values as CSV");
    tab->add_option("--r-lambda", r_lambda, "lambda ratios")->delimiter(',');
    tab->add_option("--r-gamma", r_gamma, "energy ratios")->delimiter(',');

    std::string kind, results;
    auto* plot = app.add_subcommand("plot", "render an SVG plot");
    plot->add_option("--kind", kind, "angle-velocity | profile | lambda-angle | lambda-gamma")->required();
    plot->add_option("--results", results, "sweep results CSV or profile CSV")->required();

    std::vector<std::string> only;
    auto* validate = app.add_subcommand("validate", "run the acceptance criteria");
    validate->add_option("--only", only, "criterion ids, e.g. C2,C11")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ConfigFailure;
    }
    if (*jobs_opt) g.jobs = jobs;
    if (*res_opt) g.resolution = resolution;

    if (*run) return cmd_run(g);
    if (*sweep) return cmd_sweep(g);
    if (*tab) return cmd_tabulate(r_lambda, r_gamma);
    if (*plot) return cmd_plot(g, kind, results);
    if (*validate) return cmd_validate(g, only);
    return ConfigFailure;
}
