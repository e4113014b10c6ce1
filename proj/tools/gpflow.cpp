// Command-line front end: solve / sweep / validate on flat key=value
// configuration files. See README for the configuration reference.

#include <CLI11.hpp>
#include <string>
#include <vector>

#include "gpflow/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gpflow: ground states of two-component Bose-Einstein "
                 "condensates via a semi-implicit normalized gradient flow"};
    app.require_subcommand(1);
    app.fallthrough();  // accept the global flags after the subcommand too

    gpflow::cli::GlobalOptions opts;
    std::string output_dir;
    app.add_option("--output-dir", output_dir, "Override the config output_dir");
    app.add_flag("--allow-indefinite", opts.allow_indefinite,
                 "Fall back to MINRES instead of failing when the shifted "
                 "operator is indefinite");
    app.add_option("--seed", opts.seed, "Seed for randomized validation checks");

    std::string solve_config;
    auto* solve = app.add_subcommand("solve", "Compute a ground state");
    solve->add_option("config", solve_config, "Run configuration file")->required();

    std::string sweep_config;
    std::vector<double> k_scales, taus;
    int jobs = 1;
    auto* sweep = app.add_subcommand(
        "sweep", "Grid of runs over interaction scale and time step");
    sweep->add_option("config", sweep_config, "Base configuration file")->required();
    sweep->add_option("--k", k_scales,
                      "Multipliers applied to the base interaction matrix");
    sweep->add_option("--tau", taus, "Time steps");
    sweep->add_option("--jobs", jobs, "Concurrent cells")->check(CLI::PositiveNumber);

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "Run the invariant suite");
    validate->add_option("config", validate_config, "Run configuration file")
        ->required();

    CLI11_PARSE(app, argc, argv);
    if (!output_dir.empty()) opts.output_dir = output_dir;

    if (solve->parsed()) return gpflow::cli::cmd_solve(solve_config, opts);
    if (sweep->parsed())
        return gpflow::cli::cmd_sweep(sweep_config, k_scales, taus, jobs, opts);
    return gpflow::cli::cmd_validate(validate_config, opts);
}
