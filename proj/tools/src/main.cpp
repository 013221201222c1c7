#include "pdmforge/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"pdmforge: construct, perturb and verify position-dependent-mass systems"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config;
    std::string out;
    pdm::cli::CommandOptions opts;
    app.add_flag("--override-node-guard", opts.override_node_guard,
                 "allow perturbing excited levels; points near nodes are masked");

    const std::pair<const char*, const char*> commands[] = {
        {"construct", "build the solvable system; writes system.csv and levels.json"},
        {"perturb", "extend a level by a dQ generator; writes perturbation.csv and delta.json"},
        {"verify", "check the system against a grid eigensolve; writes verify.json"},
        {"solve", "solve a registry mass/potential directly; writes spectrum.json and spectrum.csv"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "JSON run configuration")->required();
        sub->add_option("--out", out, "output directory")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pdm::cli::kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return pdm::cli::run_command(command, config, out, opts, std::cerr);
}
