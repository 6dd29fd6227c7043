// nfde-lab: batch front-end for the neutral FDE laboratory.
//
//   nfde-lab <task> --config <path> [--out <dir>]
//
// Exit codes: 0 ok, 1 condition fails, 2 config error, 3 structural problem,
// 4 monitored invariant exceeded, 5 divergence.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nfde/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for neutral functional differential equations over torus flows"};
    std::string task;
    std::string config;
    std::string out = "out";
    app.add_option("task", task, "check | simulate | pair | invert | mass-audit | covering")->required();
    app.add_option("--config", config, "experiment config (JSON)")->required();
    app.add_option("--out", out, "output directory")->capture_default_str();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : nfde::kExitConfig;
    }
    return nfde::run_task(task, config, out, std::cerr);
}
