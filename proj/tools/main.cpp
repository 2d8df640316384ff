#include <CLI11.hpp>
#include <cstdint>
#include <string>

#include "cli_runner.hpp"

#ifndef RBRW_VERSION
#define RBRW_VERSION "0.0.0"
#endif

int main(int argc, char** argv) {
    CLI::App app{"Event-driven simulator and numerical toolkit for restrained "
                 "branching random walks on finite graphs"};
    app.set_version_flag("--version", std::string("rbrw ") + RBRW_VERSION);
    app.require_subcommand(0, 1);

    std::string config_path;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::string out_dir;
    bool seed_set = false, jobs_set = false, out_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--seed", seed, "override the config's master seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--jobs", jobs, "replica parallelism cap")
            ->each([&](const std::string&) { jobs_set = true; });
        cmd->add_option("--out", out_dir, "override the output directory")
            ->each([&](const std::string&) { out_set = true; });
    };

    const char* commands[] = {"simulate", "couple", "moments", "spectral",
                              "invariant", "phases", "volumes"};
    const char* descriptions[] = {
        "run replicated event-driven simulations",
        "run the nested monotone coupling with its ordering certificate",
        "solve the first/second moment systems and steady states",
        "estimate the phase parameters rho and theta",
        "estimate truncated-rate invariant measures and their diagnostics",
        "run the regime suite against the four phase behaviors",
        "finite-volume stabilization ladder"};
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        add_common(app.add_subcommand(commands[i], descriptions[i]));
    }

    CLI11_PARSE(app, argc, argv);

    rbrw::cli::Overrides overrides;
    if (seed_set) overrides.seed = seed;
    if (jobs_set) overrides.jobs = jobs;
    if (out_set) overrides.output_dir = out_dir;
    auto subs = app.get_subcommands();
    if (subs.empty()) {
        std::fputs(app.help().c_str(), stderr);
        return rbrw::cli::kValidationError;
    }
    overrides.command = subs.front()->get_name();
    return rbrw::cli::run_config(config_path, overrides);
}
