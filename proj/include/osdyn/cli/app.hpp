#pragma once

#include <iostream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osdyn/cli/commands.hpp"

namespace osdyn::cli {

/// Parses arguments, loads the scenario and dispatches. Returns the exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Seasonally forced herbivore-vegetation toolkit"};
    app.require_subcommand(1);
    std::string config;
    CommandOptions opts;
    std::string out_path, scheme;
    double tol = 0.0, periods = 0.0;
    int seed_grid = 0;

    const std::map<std::string, std::string> help{
        {"simulate", "integrate the scenario and write t,v,h"},
        {"check", "evaluate the persistence, permanence, stability and periodic-orbit conditions"},
        {"orbit", "find periodic orbits of the period map from seeds"},
        {"sweep", "grid over one or two coefficient knobs"},
        {"reduce", "convert raw_params to simplified_params"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, text] : help) {
        CLI::App* sub = app.add_subcommand(name, text);
        sub->add_option("--config", config, "scenario file (YAML)")->required();
        sub->add_option("--out", out_path, "output path (default: stdout)");
        sub->add_option("--tol", tol, "integrator relative tolerance");
        sub->add_option("--scheme", scheme, "rk4 or rk45")->check(CLI::IsMember({"rk4", "rk45"}));
        sub->add_option("--periods", periods, "horizon in periods");
        sub->add_option("--seed-grid", seed_grid, "orbit seeds on an N x N grid");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Exit::ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return Exit::config_error;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--out")) {
        opts.out_path = out_path;
    }
    if (sub->count("--tol")) {
        opts.tol = tol;
    }
    if (sub->count("--scheme")) {
        opts.scheme = scheme == "rk4" ? Scheme::rk4 : Scheme::rk45;
    }
    if (sub->count("--periods")) {
        opts.periods = periods;
    }
    if (sub->count("--seed-grid")) {
        opts.seed_grid = seed_grid;
    }

    const std::string cmd = sub->get_name();
    try {
        const Scenario s = apply_overrides(load_scenario(config), opts);
        if (cmd == "simulate") {
            return cmd_simulate(s, opts, out, err);
        }
        if (cmd == "check") {
            return cmd_check(s, opts, out, err);
        }
        if (cmd == "orbit") {
            return cmd_orbit(s, opts, out, err);
        }
        if (cmd == "sweep") {
            return cmd_sweep(s, opts, out, err);
        }
        return cmd_reduce(s, opts, out, err);
    } catch (const ConfigError& e) {
        err << cmd << ": " << e.what() << '\n';
        return Exit::config_error;
    } catch (const SingularityError& e) {
        err << cmd << ": " << e.what() << '\n';
        return cmd == "simulate" ? Exit::singular : Exit::inapplicable;
    } catch (const Error& e) {
        // parameter-domain violations found while building coefficients
        err << cmd << ": " << e.what() << '\n';
        return Exit::config_error;
    }
}

}  // namespace osdyn::cli
