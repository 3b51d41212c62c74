// Command-line entry point:
//   nelsonium <experiment> --config <path> [--seed S] [--out DIR]
// Exit codes: 0 every embedded check passed, 1 a check failed, 2 config or
// usage error, 3 numerical breach during integration.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "nelsonium/errors.hpp"
#include "nelsonium/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nelsonium: a numerical laboratory for stochastic mechanics"};
    std::string experiment;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    app.add_option("experiment", experiment,
                   "One of: evolve, fields, marginals, sample, entropy, hierarchy, converge")
        ->required();
    app.add_option("--config", config_path, "Experiment config file")->required();
    CLI::Option* seed_opt =
        app.add_option("--seed", seed, "Seed override (takes precedence over run.seed)");
    CLI::Option* out_opt = app.add_option("--out", out_dir, "Output directory override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    nelsonium::CliOptions opts;
    opts.experiment = experiment;
    opts.config_path = config_path;
    if (seed_opt->count() > 0) {
        opts.seed_override = seed;
    }
    if (out_opt->count() > 0) {
        opts.out_override = out_dir;
    }

    try {
        return nelsonium::run_experiment(opts);
    } catch (const nelsonium::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const nelsonium::numerical_breach& e) {
        std::fprintf(stderr, "numerical breach: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
