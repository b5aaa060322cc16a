// scenario.hpp: scenario file schema, dispatch to the solvers, and CSV / SVG / report writers.

#pragma once

#include "qfs/model.hpp"
#include "qfs/spectral.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qfs {

// Schema or value error in a scenario file; the message names the key and line.
struct ScenarioError : std::invalid_argument {
    int line;
    ScenarioError(const std::string& what, int l) : std::invalid_argument(what), line(l) {}
};

enum class Mode { full_sim, reduced_delay, analytic, stability, parallel_single };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct Scenario {
    std::string name;
    std::string description;
    Mode mode = Mode::full_sim;
    double runtime_budget = 0.0;  // seconds, 0 = none
    bool svg = true;

    std::optional<SystemConfig> system;
    std::optional<WaveguideArrayConfig> array;

    std::optional<double> grid_half_width;
    std::optional<int> grid_modes;
    bool require_delay_resolution = false;

    double t_end = 0.0;
    int steps_per_delay = 16;
    int sample_every = 1;
    int samples = 500;  // analytic and parallel_single

    std::optional<std::vector<std::string>> observables;  // unset: mode defaults

    Regime regime = Regime::short_delay_resonant;
    bool zero_feedback = false;
    std::optional<bool> detuned;  // stability; unset: !resonant
    std::vector<double> initial;  // parallel_single amplitudes, default e_1

    std::optional<int> roots_count;
    int roots_nodes = 40;
};

// Parses the text of a scenario file; `origin` is used in error messages.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
Scenario load_scenario(const std::string& path);

struct RunOptions {
    std::size_t budget = 20'000'000;
};

struct RunResult {
    std::vector<std::string> columns;  // excluding t
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // values[row][column]
    std::vector<std::pair<std::string, std::string>> report;
    double elapsed = 0.0;
};

// Throws ScenarioError / std::invalid_argument on configuration errors, DivergenceError on blowup.
RunResult run_scenario(const Scenario& sc, const RunOptions& opts = {});

void write_csv(const std::string& path, const RunResult& r);
void write_svg(const std::string& path, const std::string& title, const RunResult& r);
void write_report(const std::string& path, const Scenario& sc, const RunResult& r);

struct ScenarioListing {
    std::string file;
    std::string name;
    std::string mode;
    std::string description;
    std::string error;  // non-empty if the file failed to parse
};

// Every *.scn file in `dir`, sorted by file name.
std::vector<ScenarioListing> list_scenarios(const std::string& dir);
// Compiled-in preset directory, overridable with QFS_SCENARIO_DIR.
std::string default_scenario_dir();
// A path to an existing file, or `<scenario dir>/<name>.scn`.
std::string resolve_scenario(const std::string& arg, const std::string& dir);

}  // namespace qfs
