#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ctrcac/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using ctrcac::json;

std::string resolve_out_dir(const std::string& cli_out, const ctrcac::Scenario& scenario) {
    if (!cli_out.empty()) return cli_out;
    if (scenario.output_dir) return *scenario.output_dir;
    if (const char* env = std::getenv("CTRCAC_OUT_DIR")) return env;
    return "out";
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ctrcac::IoError("cannot write " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw ctrcac::IoError("failed writing " + path.string());
}

int run_command(const std::string& scenario_arg, const std::string& out_arg, bool plot_script) {
    const ctrcac::Scenario scenario = ctrcac::load_scenario(scenario_arg);
    const fs::path out_dir = resolve_out_dir(out_arg, scenario);
    fs::create_directories(out_dir);

    const ctrcac::RunResult result = ctrcac::run_scenario(scenario);

    ctrcac::write_csv((out_dir / "timeseries.csv").string(), result.log);
    write_json(out_dir / "metrics.json", ctrcac::metrics_to_json(result.metrics));
    write_json(out_dir / "scenario.json", scenario.resolved);
    if (plot_script) {
        ctrcac::write_gnuplot_script((out_dir / "plot.gp").string(), result.log,
                                     "timeseries.csv");
    }

    std::cout << "scenario: " << scenario.name << "\n"
              << "samples: " << result.log.t.size() << " over " << scenario.sim.horizon
              << " s\n"
              << "IAE = " << result.metrics.iae << ", ISE = " << result.metrics.ise
              << ", final mean error = " << result.metrics.final_error << "\n";
    if (result.metrics.diverged) {
        std::cout << "diverged at t = " << result.metrics.diverged_at << " s\n";
    }
    std::cout << "wrote " << (out_dir / "timeseries.csv").string() << ", metrics.json, "
              << "scenario.json\n";
    return 0;
}

int tune_command(const std::string& scenario_arg, const std::string& out_arg, int swarm,
                 int iters, std::int64_t seed_arg, bool serial) {
    const ctrcac::Scenario scenario = ctrcac::load_scenario(scenario_arg);
    if (!scenario.tunable()) {
        throw ctrcac::ConfigError(
            "tuning needs scalar hyperparameters (P0 or log10_P0, and p_f)");
    }

    ctrcac::SearchSpace space;
    ctrcac::SwarmConfig cfg;
    cfg.swarm_size = swarm;
    cfg.iterations = iters;
    cfg.seed = seed_arg >= 0 ? static_cast<std::uint64_t>(seed_arg) : scenario.seed;
    cfg.parallel = !serial;

    std::cout << "tuning " << scenario.name << " with swarm " << cfg.swarm_size << ", "
              << cfg.iterations << " iterations, seed " << cfg.seed << "\n"
              << "bounds: log10(P0) in [" << space.lower(0) << ", " << space.upper(0)
              << "], p_f in [" << space.lower(1) << ", " << space.upper(1) << "]\n";

    const auto objective = [&](const ctrcac::Vector2d& p) {
        return ctrcac::score_scenario(scenario, p);
    };
    const ctrcac::PsoResult result = ctrcac::pso_optimize(objective, space, cfg);

    const fs::path out_dir = resolve_out_dir(out_arg, scenario);
    fs::create_directories(out_dir);
    ctrcac::write_pso_history_csv((out_dir / "pso_history.csv").string(), result);

    json best;
    best["log10_P0"] = result.best_position(0);
    best["p_f"] = result.best_position(1);
    best["score"] = result.best_score;
    write_json(out_dir / "pso_best.json", best);

    const ctrcac::Scenario tuned =
        ctrcac::with_hyperparameters(scenario, result.best_position(0), result.best_position(1));
    write_json(out_dir / "scenario_best.json", tuned.resolved);

    std::cout << "best: log10(P0) = " << result.best_position(0)
              << ", p_f = " << result.best_position(1) << " (score = " << result.best_score
              << ")\n"
              << "wrote " << (out_dir / "pso_history.csv").string()
              << ", pso_best.json, scenario_best.json\n";
    return 0;
}

int presets_command(const std::string& dump) {
    if (!dump.empty()) {
        std::cout << ctrcac::preset_document(dump).dump(2) << "\n";
        return 0;
    }
    for (const auto& name : ctrcac::preset_names()) {
        std::cout << name << " -- " << ctrcac::preset_summary(name) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous-time retrospective-cost adaptive control simulator"};
    app.require_subcommand(1);

    std::string scenario_arg, out_arg, dump_arg;
    int swarm = 5, iters = 30;
    std::int64_t seed = -1;
    bool serial = false, plot_script = false;

    auto* run = app.add_subcommand("run", "simulate a scenario and write CSV/metrics");
    run->add_option("scenario", scenario_arg, "scenario file or preset name")->required();
    run->add_option("--out", out_arg, "output directory");
    run->add_flag("--plot-script", plot_script, "also emit a gnuplot script");

    auto* tune = app.add_subcommand("tune", "optimize P0 and p_f by particle swarm");
    tune->add_option("scenario", scenario_arg, "scenario file or preset name")->required();
    tune->add_option("--out", out_arg, "output directory");
    tune->add_option("--swarm", swarm, "swarm size")->check(CLI::PositiveNumber);
    tune->add_option("--iters", iters, "iteration count")->check(CLI::PositiveNumber);
    tune->add_option("--seed", seed, "rng seed (defaults to the scenario's)");
    tune->add_flag("--serial", serial, "evaluate particles sequentially");

    auto* presets = app.add_subcommand("presets", "list bundled scenarios");
    presets->add_option("--dump", dump_arg, "print one preset as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(scenario_arg, out_arg, plot_script);
        if (tune->parsed()) return tune_command(scenario_arg, out_arg, swarm, iters, seed, serial);
        if (presets->parsed()) return presets_command(dump_arg);
    } catch (const ctrcac::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ctrcac::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ctrcac::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 1;
}
