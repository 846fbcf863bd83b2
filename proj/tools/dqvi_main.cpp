#include "dqvi/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Coupled contact/wear/damage solver driven by nested fixed-point "
                 "iterations over a Rothe time grid"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int levels = 3;
    long long seed = -1;
    bool override_margin = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides config)");
        cmd->add_option("--seed", seed, "RNG seed (overrides config)");
        cmd->add_flag("--override-margin", override_margin,
                      "step even when the smallness margin is violated");
    };
    CLI::App* run_cmd = app.add_subcommand("run", "time-step the configured problem");
    add_common(run_cmd);
    CLI::App* conv_cmd =
        app.add_subcommand("convergence", "self-convergence study over halved time steps");
    add_common(conv_cmd);
    conv_cmd->add_option("--levels", levels, "number of refinement levels (>= 3)");
    CLI::App* val_cmd =
        app.add_subcommand("validate", "audit declared constants and report margins");
    add_common(val_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        dqvi::RunConfig cfg = dqvi::load_config(config_path);
        if (seed >= 0) cfg.seed = static_cast<unsigned long long>(seed);
        if (override_margin) cfg.stepper.override_margin = true;
        const std::string out = out_dir.empty() ? cfg.output_dir : out_dir;

        if (run_cmd->parsed()) {
            dqvi::RunArtifacts art = dqvi::cmd_run(cfg, out);
            if (art.exit_code == 0)
                std::cout << "ok: trajectory written to " << art.trajectory_path << "\n";
            else
                std::cerr << "failed: " << art.message << "\n";
            return art.exit_code;
        }
        if (conv_cmd->parsed()) {
            dqvi::ConvergenceArtifacts art = dqvi::cmd_convergence(cfg, out, levels);
            for (const auto& row : art.rows) {
                std::cout << "N=" << row.steps;
                if (row.has_diff) std::cout << " diff=" << dqvi::fmt17(row.diff);
                if (row.exact)
                    std::cout << " order=exact";
                else if (row.has_order)
                    std::cout << " order=" << dqvi::fmt17(row.order);
                std::cout << "\n";
            }
            if (art.exit_code != 0) std::cerr << "failed: " << art.message << "\n";
            return art.exit_code;
        }
        dqvi::ValidateArtifacts art = dqvi::cmd_validate(cfg);
        std::cout << art.text;
        return art.exit_code;
    } catch (const dqvi::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 4;
    } catch (const dqvi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}
