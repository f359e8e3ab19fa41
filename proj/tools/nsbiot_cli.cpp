// nsbiot: run, validate or run the convergence study for a config file.
#include "nsbiot/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Coupled Navier-Stokes / Biot solver"};
    app.require_subcommand(1);

    std::string config;
    nsbiot::RunOverrides o;
    std::string out_dir, levels;
    int threads = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "Config file")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
        sub->add_option("--threads", threads, "Assembly threads (overrides threads)")->check(CLI::PositiveNumber);
    };
    auto* run = app.add_subcommand("run", "Time-step a scenario and write outputs");
    auto* validate = app.add_subcommand("validate", "Check a config without solving");
    auto* conv = app.add_subcommand("convergence", "Manufactured-solution convergence study");
    add_common(run);
    add_common(validate);
    add_common(conv);
    conv->add_option("--levels", levels, "Grids as fnx x fny:pnx x pny, comma separated, or a level count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nsbiot::kExitConfig;
    }
    if (!out_dir.empty()) o.out_dir = out_dir;
    if (threads > 0) o.threads = threads;
    if (!levels.empty()) o.levels = levels;

    if (*run) return nsbiot::cmd_run(config, o, std::cerr);
    if (*validate) return nsbiot::cmd_validate(config, o, std::cout);
    return nsbiot::cmd_convergence(config, o, std::cerr);
}
