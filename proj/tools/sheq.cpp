// Batch front end: parse a config file, run the named experiment, emit
// tables, JSON summaries and SVG plots.

#include <iostream>

#include <CLI11.hpp>

#include "sheq/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spectral exponential-Euler laboratory for stochastic heat equations"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "path to the config file (JSON, comments allowed)")
        ->required();

    std::string experiment;
    auto* describe = app.add_subcommand("describe", "explain what an experiment exercises");
    describe->add_option("experiment", experiment, "experiment name")->required();

    auto* version = app.add_subcommand("version", "print version and build information");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const sheq::Config cfg = sheq::load_config(config_path);
            const sheq::RunOutcome out = sheq::run_experiment(cfg, std::cout);
            return out.exit_code;
        }
        if (describe->parsed()) {
            std::cout << sheq::describe_experiment(experiment) << "\n";
            return 0;
        }
        if (version->parsed()) {
            std::cout << "sheq 1.0.0 (" << sheq::build_describe() << ")\n";
            return 0;
        }
    } catch (const sheq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const sheq::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const sheq::EstimationDegraded& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
