#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "inclusionkit/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    const auto cfg = inclusionkit::load_config(config_path);
    const auto result = inclusionkit::run_experiment(cfg);
    for (const auto& w : result.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    std::cout << inclusionkit::to_string(result.report.verdict) << " after "
              << result.report.records.size() << " iterations; trace written to "
              << cfg.outputs.trace << ", summary to " << cfg.outputs.summary << "\n";
    return result.exit_code;
}

int cmd_preset(const std::string& name, const std::string& emit_path) {
    const auto cfg = inclusionkit::preset(name);
    const std::string text = inclusionkit::emit_config(cfg);
    if (emit_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(emit_path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("preset: cannot open '" + emit_path + "' for writing");
        }
        out << text;
    }
    return 0;
}

int cmd_bounds(const std::string& config_path) {
    const auto cfg = inclusionkit::load_config(config_path);
    std::cout << inclusionkit::describe_bounds(cfg);
    return 0;
}

int cmd_mc(const std::string& config_path, int seeds_override, const std::string& out_path) {
    const auto cfg = inclusionkit::load_config(config_path);
    if (cfg.type != inclusionkit::ProblemType::stochastic) {
        throw inclusionkit::ValidationError({"mc: config must describe a stochastic problem"});
    }
    const int n_seeds = seeds_override > 0 ? seeds_override : cfg.n_seeds.value_or(0);
    if (n_seeds < 1) {
        throw inclusionkit::ValidationError(
            {"mc: give --seeds N or set n_seeds in the config"});
    }
    const auto op = inclusionkit::build_stochastic_op(cfg);
    const auto curve = inclusionkit::mc_expected_residual(
        op, inclusionkit::Vector(cfg.z0), cfg.schedule.to_schedule(), cfg.stop, n_seeds,
        cfg.seed.value_or(0), cfg.resolvent_mode);
    const std::string path = out_path.empty() ? cfg.outputs.trace : out_path;
    inclusionkit::write_mc_csv(curve, path);
    std::cout << "mc curve over " << n_seeds << " seeds written to " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split variational inclusion solver toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset_name;
    std::string emit_path;
    std::string mc_out;
    int mc_seeds = 0;

    auto* run = app.add_subcommand("run", "Solve the experiment described by a config file");
    run->add_option("config", config_path, "path to a JSON experiment config")->required();

    auto* pre = app.add_subcommand("preset", "Print or write a built-in experiment config");
    pre->add_option("name", preset_name, "dynamic-svi | stochastic-svi | coupled-svi")
        ->required();
    pre->add_option("--emit-config", emit_path, "write the config here instead of stdout");

    auto* bounds =
        app.add_subcommand("bounds", "Print closed-form predictions without solving");
    bounds->add_option("config", config_path, "path to a JSON experiment config")->required();

    auto* mc = app.add_subcommand("mc", "Monte Carlo mean-squared-error curve over seeds");
    mc->add_option("config", config_path, "path to a stochastic JSON experiment config")
        ->required();
    mc->add_option("--seeds", mc_seeds, "number of replications (overrides config n_seeds)");
    mc->add_option("--out", mc_out, "curve CSV path (default: the config's trace path)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(config_path);
        if (app.got_subcommand(pre)) return cmd_preset(preset_name, emit_path);
        if (app.got_subcommand(bounds)) return cmd_bounds(config_path);
        if (app.got_subcommand(mc)) return cmd_mc(config_path, mc_seeds, mc_out);
    } catch (const inclusionkit::ValidationError& e) {
        for (const auto& msg : e.messages) {
            std::cerr << "error: " << msg << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
