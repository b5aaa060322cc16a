// qfs.cpp: command-line scenario runner.

#include "qfs/dde.hpp"
#include "qfs/fullsim.hpp"
#include "qfs/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

enum ExitCode { ok = 0, failure = 1, config_error = 2, divergence = 3 };

int run_command(const std::string& target, const std::string& out_dir, const std::string& scenario_dir,
                std::size_t budget, bool quiet) {
    const std::string path = qfs::resolve_scenario(target, scenario_dir);
    const qfs::Scenario sc = qfs::load_scenario(path);
    qfs::RunOptions opts;
    opts.budget = budget;
    const qfs::RunResult r = qfs::run_scenario(sc, opts);

    std::filesystem::create_directories(out_dir);
    const auto base = std::filesystem::path(out_dir) / sc.name;
    const std::string csv = base.string() + "_timeseries.csv";
    const std::string report = base.string() + "_report";
    qfs::write_csv(csv, r);
    qfs::write_report(report, sc, r);
    std::string svg;
    if (sc.svg && !r.columns.empty()) {
        svg = base.string() + ".svg";
        qfs::write_svg(svg, sc.name, r);
    }
    if (!quiet) {
        std::cout << sc.name << " (" << qfs::to_string(sc.mode) << ") finished in " << r.elapsed << " s\n";
        std::cout << "  " << csv << "\n  " << report << '\n';
        if (!svg.empty()) std::cout << "  " << svg << '\n';
        if (sc.runtime_budget > 0.0 && r.elapsed > sc.runtime_budget)
            std::cout << "  warning: runtime budget of " << sc.runtime_budget << " s exceeded\n";
    }
    return ok;
}

int list_command(const std::string& dir) {
    for (const auto& l : qfs::list_scenarios(dir)) {
        if (!l.error.empty()) {
            std::cout << l.name << "  [parse error: " << l.error << "]\n";
            continue;
        }
        std::cout << l.name << "  (" << l.mode << ")";
        if (!l.description.empty()) std::cout << "  " << l.description;
        std::cout << '\n';
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and stability analyzer for an N-level atom in a cavity with waveguide feedback"};
    app.require_subcommand(1);

    const char* env_out = std::getenv("QFS_OUT_DIR");
    std::string out_dir = env_out && *env_out ? env_out : ".";
    std::string scenario_dir = qfs::default_scenario_dir();
    std::size_t budget = qfs::FullSimOptions{}.budget;
    bool quiet = false;
    std::string target;

    auto* run = app.add_subcommand("run", "Run a scenario file or bundled preset");
    run->add_option("scenario", target, "Scenario file path or preset name")->required();
    run->add_option("--out-dir", out_dir, "Output directory (default: $QFS_OUT_DIR or .)");
    run->add_option("--budget", budget, "Maximum number of amplitudes in a full simulation");
    run->add_option("--scenario-dir", scenario_dir, "Directory searched for preset names");
    run->add_flag("--quiet", quiet, "Suppress progress output");

    auto* list = app.add_subcommand("list", "List bundled scenario presets");
    list->add_option("--dir", scenario_dir, "Scenario directory to list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*run) return run_command(target, out_dir, scenario_dir, budget, quiet);
        return list_command(scenario_dir);
    } catch (const qfs::DivergenceError& e) {
        std::cerr << "error: numerical divergence: " << e.what() << '\n';
        return divergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
}
