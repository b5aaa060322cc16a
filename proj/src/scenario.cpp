// scenario.cpp: scenario parsing, dispatch and artifact writers.

#include "qfs/scenario.hpp"

#include "qfs/dde.hpp"
#include "qfs/fullsim.hpp"
#include "qfs/parallel.hpp"
#include "qfs/stability.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#ifndef QFS_SCENARIO_DIR
#define QFS_SCENARIO_DIR "scenarios"
#endif

namespace qfs {

namespace {

namespace fs = std::filesystem;

struct Entry {
    std::string value;
    int line = 0;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"", {"name", "mode", "description", "runtime_budget"}},
        {"system",
         {"n_levels", "gamma", "delta", "g0", "kappa", "delta0", "tau", "feedback_phase", "field_speed", "ladder"}},
        {"array", {"n_waveguides", "couplings", "propagation"}},
        {"grid", {"half_width", "n_modes", "require_delay_resolution"}},
        {"numerics", {"t_end", "steps_per_delay", "sample_every", "samples", "zero_feedback"}},
        {"analytic", {"regime"}},
        {"stability", {"detuned"}},
        {"parallel", {"initial"}},
        {"roots", {"count", "nodes"}},
        {"output", {"observables", "svg"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

// Arithmetic over numbers, named constants, + - * / and parentheses.
class Expression {
public:
    Expression(const std::string& text, const std::map<std::string, double>& symbols)
        : s_(text), sym_(symbols) {}

    double evaluate() {
        const double v = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) { throw std::invalid_argument(why); }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    double sum() {
        double v = product();
        for (;;) {
            skip();
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
                const char op = s_[pos_++];
                const double r = product();
                v = op == '+' ? v + r : v - r;
            } else {
                return v;
            }
        }
    }
    double product() {
        double v = unary();
        for (;;) {
            skip();
            if (pos_ < s_.size() && (s_[pos_] == '*' || s_[pos_] == '/')) {
                const char op = s_[pos_++];
                const double r = unary();
                v = op == '*' ? v * r : v / r;
            } else {
                return v;
            }
        }
    }
    double unary() {
        skip();
        if (pos_ < s_.size() && s_[pos_] == '-') {
            ++pos_;
            return -unary();
        }
        if (pos_ < s_.size() && s_[pos_] == '+') {
            ++pos_;
            return unary();
        }
        return primary();
    }
    double primary() {
        skip();
        if (pos_ >= s_.size()) fail("expected a value");
        if (s_[pos_] == '(') {
            ++pos_;
            const double v = sum();
            skip();
            if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
            ++pos_;
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_') {
            const std::size_t b = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string id = s_.substr(b, pos_ - b);
            auto it = sym_.find(id);
            if (it == sym_.end()) fail("unknown name '" + id + "'");
            return it->second;
        }
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("expected a number at '" + s_.substr(pos_) + "'");
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    std::string s_;
    const std::map<std::string, double>& sym_;
    std::size_t pos_ = 0;
};

class Reader {
public:
    Reader(std::map<std::string, Section> sections, std::map<std::string, int> headers, std::string origin)
        : sec_(std::move(sections)), headers_(std::move(headers)), origin_(std::move(origin)) {
        symbols_["pi"] = pi;
    }

    void define(const std::string& name, double v) { symbols_[name] = v; }
    bool has_section(const std::string& s) const { return sec_.count(s) > 0; }
    bool has(const std::string& s, const std::string& k) const {
        auto it = sec_.find(s);
        return it != sec_.end() && it->second.count(k) > 0;
    }
    int line(const std::string& s, const std::string& k) const {
        if (has(s, k)) return sec_.at(s).at(k).line;
        auto h = headers_.find(s);
        return h == headers_.end() ? 0 : h->second;
    }

    [[noreturn]] void error(const std::string& s, const std::string& k, const std::string& why) const {
        const int l = line(s, k);
        const std::string where = s.empty() ? k : "[" + s + "] " + k;
        throw ScenarioError(origin_ + ":" + std::to_string(l) + ": key '" + where + "': " + why, l);
    }

    const std::string& raw(const std::string& s, const std::string& k) const {
        if (!has(s, k)) error(s, k, "required key is missing");
        return sec_.at(s).at(k).value;
    }

    std::string text(const std::string& s, const std::string& k) const { return raw(s, k); }
    std::string text(const std::string& s, const std::string& k, const std::string& def) const {
        return has(s, k) ? raw(s, k) : def;
    }

    double number(const std::string& s, const std::string& k) const {
        const std::string& v = raw(s, k);
        try {
            const double x = Expression(v, symbols_).evaluate();
            if (!std::isfinite(x)) error(s, k, "value is not finite");
            return x;
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::exception& e) {
            error(s, k, std::string("cannot parse '") + v + "': " + e.what());
        }
    }
    double number(const std::string& s, const std::string& k, double def) const {
        return has(s, k) ? number(s, k) : def;
    }

    int integer(const std::string& s, const std::string& k) const {
        const double x = number(s, k);
        if (x != std::floor(x) || std::abs(x) > 1e9) error(s, k, "expected an integer");
        return static_cast<int>(x);
    }
    int integer(const std::string& s, const std::string& k, int def) const {
        return has(s, k) ? integer(s, k) : def;
    }

    bool boolean(const std::string& s, const std::string& k, bool def) const {
        if (!has(s, k)) return def;
        const std::string& v = raw(s, k);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        error(s, k, "expected true or false, got '" + v + "'");
    }

    std::vector<double> numbers(const std::string& s, const std::string& k) const {
        std::vector<double> out;
        for (const auto& item : split_list(raw(s, k))) {
            try {
                out.push_back(Expression(item, symbols_).evaluate());
            } catch (const std::exception& e) {
                error(s, k, std::string("cannot parse list item '") + item + "': " + e.what());
            }
        }
        return out;
    }

private:
    std::map<std::string, Section> sec_;
    std::map<std::string, int> headers_;
    std::string origin_;
    std::map<std::string, double> symbols_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string fmt(cdouble v) {
    return fmt(v.real()) + (v.imag() < 0 ? " - " : " + ") + fmt(std::abs(v.imag())) + "i";
}

}  // namespace

std::string to_string(Mode m) {
    switch (m) {
        case Mode::full_sim: return "full_sim";
        case Mode::reduced_delay: return "reduced_delay";
        case Mode::analytic: return "analytic";
        case Mode::stability: return "stability";
        case Mode::parallel_single: return "parallel_single";
    }
    return "";
}

Mode mode_from_string(const std::string& s) {
    if (s == "full_sim") return Mode::full_sim;
    if (s == "reduced_delay") return Mode::reduced_delay;
    if (s == "analytic") return Mode::analytic;
    if (s == "stability") return Mode::stability;
    if (s == "parallel_single") return Mode::parallel_single;
    throw std::invalid_argument("unknown mode '" + s +
                                "' (expected full_sim, reduced_delay, analytic, stability or parallel_single)");
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    std::map<std::string, Section> sections;
    std::map<std::string, int> headers;
    sections[""];
    std::string current;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw ScenarioError(origin + ":" + std::to_string(lineno) + ": " + why, lineno);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header '" + line + "'");
            current = trim(line.substr(1, line.size() - 2));
            if (!schema().count(current) || current.empty()) fail("unknown section '[" + current + "]'");
            if (headers.count(current)) fail("duplicate section '[" + current + "]'");
            headers[current] = lineno;
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string where = current.empty() ? key : "[" + current + "] " + key;
        if (key.empty()) fail("empty key");
        if (!schema().at(current).count(key)) fail("unknown key '" + where + "'");
        if (sections[current].count(key)) fail("duplicate key '" + where + "'");
        sections[current][key] = {value, lineno};
    }

    Reader r(std::move(sections), std::move(headers), origin);
    Scenario sc;
    sc.name = r.text("", "name");
    if (sc.name.empty() || sc.name.find_first_of("/\\ \t") != std::string::npos)
        r.error("", "name", "must be non-empty without spaces or slashes");
    try {
        sc.mode = mode_from_string(r.text("", "mode"));
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        r.error("", "mode", e.what());
    }
    sc.description = r.text("", "description", "");
    sc.runtime_budget = r.number("", "runtime_budget", 0.0);

    if (r.has_section("system")) {
        SystemConfig cfg;
        cfg.n_levels = r.integer("system", "n_levels");
        cfg.gamma = r.numbers("system", "gamma");
        cfg.delta = r.has("system", "delta") ? r.numbers("system", "delta")
                                             : std::vector<double>(static_cast<std::size_t>(
                                                                       std::max(cfg.n_levels - 1, 0)),
                                                                   0.0);
        cfg.field_speed = r.number("system", "field_speed", 1.0);
        if (r.has("system", "g0") == r.has("system", "kappa"))
            r.error("system", "g0", "exactly one of g0 and kappa must be given");
        cfg.g0 = r.has("system", "g0") ? r.number("system", "g0")
                                       : g0_for_kappa(r.number("system", "kappa"), cfg.field_speed);
        cfg.delta0 = r.number("system", "delta0");
        if (r.has("system", "tau") == r.has("system", "feedback_phase"))
            r.error("system", "tau", "exactly one of tau and feedback_phase must be given");
        cfg.tau = r.has("system", "tau") ? r.number("system", "tau")
                                         : r.number("system", "feedback_phase") / cfg.delta0;
        try {
            cfg.ladder = ladder_scaling_from_string(r.text("system", "ladder", "bosonic"));
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            r.error("system", "ladder", e.what());
        }
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            r.error("system", "n_levels", e.what());
        }
        r.define("tau", cfg.tau);
        r.define("kappa", cfg.kappa());
        r.define("delta0", cfg.delta0);
        sc.system = cfg;
    }

    if (r.has_section("array")) {
        WaveguideArrayConfig w;
        w.n_waveguides = r.integer("array", "n_waveguides");
        w.couplings = r.has("array", "couplings") ? r.numbers("array", "couplings") : std::vector<double>{};
        w.propagation = r.has("array", "propagation")
                            ? r.numbers("array", "propagation")
                            : std::vector<double>(static_cast<std::size_t>(std::max(w.n_waveguides, 0)), 0.0);
        try {
            w.validate();
        } catch (const std::invalid_argument& e) {
            r.error("array", "n_waveguides", e.what());
        }
        sc.array = w;
    }

    if (r.has("grid", "half_width")) sc.grid_half_width = r.number("grid", "half_width");
    if (r.has("grid", "n_modes")) sc.grid_modes = r.integer("grid", "n_modes");
    sc.require_delay_resolution = r.boolean("grid", "require_delay_resolution", false);

    sc.t_end = r.number("numerics", "t_end");
    if (!(sc.t_end > 0.0)) r.error("numerics", "t_end", "must be > 0");
    sc.steps_per_delay = r.integer("numerics", "steps_per_delay", 16);
    sc.sample_every = r.integer("numerics", "sample_every", 1);
    sc.samples = r.integer("numerics", "samples", 500);
    sc.zero_feedback = r.boolean("numerics", "zero_feedback", false);
    if (sc.steps_per_delay < 1) r.error("numerics", "steps_per_delay", "must be >= 1");
    if (sc.sample_every < 1) r.error("numerics", "sample_every", "must be >= 1");
    if (sc.samples < 1) r.error("numerics", "samples", "must be >= 1");

    if (r.has("analytic", "regime")) {
        try {
            sc.regime = regime_from_string(r.text("analytic", "regime"));
        } catch (const std::invalid_argument& e) {
            r.error("analytic", "regime", e.what());
        }
    }
    if (r.has("stability", "detuned")) sc.detuned = r.boolean("stability", "detuned", false);
    if (r.has("parallel", "initial")) sc.initial = r.numbers("parallel", "initial");

    if (r.has_section("roots")) {
        sc.roots_count = r.integer("roots", "count");
        sc.roots_nodes = r.integer("roots", "nodes", 40);
        if (*sc.roots_count < 1) r.error("roots", "count", "must be >= 1");
        if (sc.roots_nodes < 4) r.error("roots", "nodes", "must be >= 4");
    }

    if (r.has("output", "observables")) {
        sc.observables = split_list(r.text("output", "observables"));
        for (const auto& o : *sc.observables)
            if (o.empty()) r.error("output", "observables", "empty observable name");
    }
    sc.svg = r.boolean("output", "svg", true);

    const bool needs_system = sc.mode != Mode::parallel_single;
    if (needs_system && !sc.system) r.error("system", "n_levels", "mode " + to_string(sc.mode) + " requires [system]");
    if (sc.mode == Mode::parallel_single && !sc.array)
        r.error("array", "n_waveguides", "mode parallel_single requires [array]");
    if (sc.mode == Mode::analytic && sc.system->n_levels != 3)
        r.error("system", "n_levels", "mode analytic requires n_levels = 3");
    if (sc.mode == Mode::full_sim && sc.system->n_levels > 3)
        r.error("system", "n_levels", "mode full_sim supports n_levels <= 3");
    if ((sc.mode == Mode::reduced_delay || sc.mode == Mode::stability) && sc.steps_per_delay < 16)
        r.error("numerics", "steps_per_delay", "delay integration requires steps_per_delay >= 16");
    if (sc.roots_count && !sc.system) r.error("roots", "count", "[roots] requires [system]");
    if (sc.mode == Mode::parallel_single && sc.array && !sc.initial.empty() &&
        sc.initial.size() != static_cast<std::size_t>(sc.array->n_waveguides))
        r.error("parallel", "initial", "must have n_waveguides entries");
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'", 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

namespace {

struct Table {
    std::vector<std::string> names;
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
};

// Selects requested columns from the full set of available ones.
RunResult select(const Scenario& sc, Table all, const std::vector<std::string>& defaults) {
    RunResult r;
    const std::vector<std::string> want = sc.observables ? *sc.observables : defaults;
    std::vector<std::size_t> idx;
    for (const auto& w : want) {
        auto it = std::find(all.names.begin(), all.names.end(), w);
        if (it == all.names.end()) {
            std::string avail;
            for (const auto& n : all.names) avail += (avail.empty() ? "" : ", ") + n;
            throw ScenarioError("key '[output] observables': unknown observable '" + w + "' for mode " +
                                    to_string(sc.mode) + " (available: " + avail + ")",
                                0);
        }
        idx.push_back(static_cast<std::size_t>(it - all.names.begin()));
    }
    r.columns = want;
    r.times = std::move(all.times);
    r.values.reserve(all.rows.size());
    for (const auto& row : all.rows) {
        std::vector<double> v;
        v.reserve(idx.size());
        for (std::size_t i : idx) v.push_back(row[i]);
        r.values.push_back(std::move(v));
    }
    return r;
}

void add_final_values(RunResult& r) {
    if (r.values.empty()) return;
    for (std::size_t c = 0; c < r.columns.size(); ++c)
        r.report.emplace_back("final_" + r.columns[c], fmt(r.values.back()[c]));
}

std::vector<std::string> cavity_names(int n, bool with_abs) {
    std::vector<std::string> out;
    for (int j = 0; j < n; ++j) out.push_back("cav_pop_" + std::to_string(j));
    if (with_abs)
        for (int j = 0; j < n; ++j) out.push_back("cav_abs_" + std::to_string(j));
    return out;
}

void push_cavity(std::vector<double>& row, const Eigen::VectorXcd& x) {
    for (Eigen::Index j = 0; j < x.size(); ++j) row.push_back(std::norm(x(j)));
    for (Eigen::Index j = 0; j < x.size(); ++j) row.push_back(std::abs(x(j)));
}

RunResult run_full(const Scenario& sc, const RunOptions& opts) {
    const SystemConfig& cfg = *sc.system;
    WaveguideArrayConfig w;
    if (sc.array) {
        w = *sc.array;
    } else {
        w.n_waveguides = 1;
        w.propagation = {0.0};
    }
    const int N = cfg.n_levels;
    const int W = w.n_waveguides;
    const double hw = sc.grid_half_width ? *sc.grid_half_width : ModeGrid::defaults(cfg, sc.t_end).half_width;
    ModeGrid grid = ModeGrid::for_horizon(cfg.delta0, hw, sc.t_end);
    if (sc.grid_modes) grid.n_modes = *sc.grid_modes;

    FullSimOptions o;
    o.sample_every = sc.sample_every;
    o.budget = opts.budget;
    o.require_delay_resolution = sc.require_delay_resolution;
    const double h = cfg.tau / sc.steps_per_delay;
    const FullTrajectory tr = simulate_waveguide_array(cfg, w, grid, sc.t_end, h, o);

    Table t;
    t.names = cavity_names(N, true);
    for (int n = 0; n < N; ++n) t.names.push_back("photons_" + std::to_string(n));
    for (int k = 0; k < W; ++k)
        for (int n = 1; n < N; ++n) t.names.push_back("wg" + std::to_string(k + 1) + "_photons_" + std::to_string(n));
    t.names.push_back("norm");
    double max_dev = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        std::vector<double> row;
        push_cavity(row, tr.cavity[i]);
        for (int n = 0; n < N; ++n) row.push_back(tr.photon_populations[i](n));
        for (int k = 0; k < W; ++k)
            for (int n = 1; n < N; ++n) row.push_back(tr.waveguide_populations[i](k, n));
        row.push_back(tr.norm[i]);
        max_dev = std::max(max_dev, std::abs(tr.norm[i] - 1.0));
        t.times.push_back(tr.times[i]);
        t.rows.push_back(std::move(row));
    }
    std::vector<std::string> defaults = cavity_names(N, false);
    for (int n = 0; n < N; ++n) defaults.push_back("photons_" + std::to_string(n));
    if (W > 1)
        for (int k = 0; k < W; ++k)
            for (int n = 1; n < N; ++n) defaults.push_back("wg" + std::to_string(k + 1) + "_photons_" + std::to_string(n));
    defaults.push_back("norm");

    RunResult r = select(sc, std::move(t), defaults);
    r.report.emplace_back("kappa", fmt(cfg.kappa()));
    r.report.emplace_back("grid_center", fmt(grid.center));
    r.report.emplace_back("grid_half_width", fmt(grid.half_width));
    r.report.emplace_back("grid_n_modes", std::to_string(grid.n_modes));
    r.report.emplace_back("grid_spacing", fmt(grid.spacing()));
    r.report.emplace_back("grid_recurrence_time", fmt(grid.recurrence_time()));
    r.report.emplace_back("grid_resolves_delay", grid.resolves_delay(cfg.tau) ? "true" : "false");
    r.report.emplace_back("n_amplitudes", std::to_string(tr.n_amplitudes));
    r.report.emplace_back("step", fmt(h));
    r.report.emplace_back("max_norm_deviation", fmt(max_dev));
    r.report.emplace_back("no_photon_criterion", no_photon_criterion(cfg) ? "true" : "false");
    if (N == 3 && cfg.resonant() && cfg.kappa() * cfg.tau < short_delay_limit) {
        const FinalValues fv = final_values(cfg);
        r.report.emplace_back("predicted_oscillatory", fv.oscillatory ? "true" : "false");
        r.report.emplace_back("predicted_waveguide_photons", std::to_string(fv.waveguide_photons));
    }
    if (W > 1) {
        std::string poles;
        for (const auto& p : characteristic_poles(w)) poles += (poles.empty() ? "" : "; ") + fmt(p);
        r.report.emplace_back("array_poles", poles);
    }
    return r;
}

RunResult run_reduced(const Scenario& sc) {
    const SystemConfig& cfg = *sc.system;
    DelaySystem sys = build_cavity_delay_system(cfg);
    if (sc.zero_feedback) sys.b.setZero();
    const Trajectory<cdouble> tr = integrate_delay(sys, sc.t_end, sc.steps_per_delay, sc.sample_every);
    Table t;
    t.names = cavity_names(cfg.n_levels, true);
    t.names.push_back("norm");
    for (std::size_t i = 0; i < tr.size(); ++i) {
        std::vector<double> row;
        push_cavity(row, tr.states[i]);
        row.push_back(tr.states[i].squaredNorm());
        t.times.push_back(tr.times[i]);
        t.rows.push_back(std::move(row));
    }
    std::vector<std::string> defaults = cavity_names(cfg.n_levels, false);
    defaults.push_back("norm");
    RunResult r = select(sc, std::move(t), defaults);
    r.report.emplace_back("kappa", fmt(cfg.kappa()));
    r.report.emplace_back("zero_feedback", sc.zero_feedback ? "true" : "false");
    r.report.emplace_back("upsilon_bound", fmt(sys.upsilon_bound));
    if (cfg.n_levels == 3) {
        const DarkStateResult d = detuned_dark_state_check(cfg);
        r.report.emplace_back("dark_state", d.dark ? "true" : "false");
        if (d.dark) r.report.emplace_back("dark_state_mean", fmt(d.mean));
    }
    return r;
}

RunResult run_analytic(const Scenario& sc) {
    const SystemConfig& cfg = *sc.system;
    Table t;
    t.names = cavity_names(3, true);
    t.names.push_back("norm");
    for (int i = 0; i <= sc.samples; ++i) {
        const double time = sc.t_end * i / sc.samples;
        const ThreeLevelAmplitudes a = analytic_three_level(cfg, sc.regime, time);
        Eigen::VectorXcd x(3);
        x << a.c0, a.c11, a.c22;
        std::vector<double> row;
        push_cavity(row, x);
        row.push_back(x.squaredNorm());
        t.times.push_back(time);
        t.rows.push_back(std::move(row));
    }
    std::vector<std::string> defaults = cavity_names(3, false);
    defaults.push_back("norm");
    RunResult r = select(sc, std::move(t), defaults);
    r.report.emplace_back("regime", to_string(sc.regime));
    if (sc.regime != Regime::long_delay) {
        const FinalValues fv = final_values(cfg);
        r.report.emplace_back("predicted_oscillatory", fv.oscillatory ? "true" : "false");
        r.report.emplace_back("predicted_waveguide_photons", std::to_string(fv.waveguide_photons));
    }
    return r;
}

RunResult run_stability(const Scenario& sc) {
    const SystemConfig& cfg = *sc.system;
    const RealDelaySystem sys = build_real_embedding(build_cavity_delay_system(cfg));
    const bool detuned = sc.detuned ? *sc.detuned : !cfg.resonant();
    const auto cert = search_certificate(sys, detuned);
    const Trajectory<double> tr = integrate_delay(sys, sc.t_end, sc.steps_per_delay, sc.sample_every);

    Table t;
    t.names = {"state_norm"};
    if (cert) t.names.push_back("envelope");
    for (std::size_t i = 0; i < tr.size(); ++i) {
        std::vector<double> row{tr.norm(i)};
        if (cert) row.push_back(cert->chi() * std::exp(-cert->beta * tr.times[i]));
        t.times.push_back(tr.times[i]);
        t.rows.push_back(std::move(row));
    }
    const std::vector<std::string> defaults = t.names;
    RunResult r = select(sc, std::move(t), defaults);
    r.report.emplace_back("detuned", detuned ? "true" : "false");
    r.report.emplace_back("upsilon_bound", fmt(sys.upsilon_bound));
    r.report.emplace_back("certified", cert ? "true" : "false");
    if (cert) {
        const CertificateCheck chk = check_certificate(sys, *cert, detuned);
        const EnvelopeReport env = verify_envelope(tr, *cert);
        r.report.emplace_back("beta", fmt(cert->beta));
        r.report.emplace_back("alpha1", fmt(cert->alpha1));
        r.report.emplace_back("alpha2", fmt(cert->alpha2));
        r.report.emplace_back("chi", fmt(cert->chi()));
        r.report.emplace_back("q_scale", fmt(cert->q(0, 0)));
        r.report.emplace_back("margin", fmt(chk.margin));
        r.report.emplace_back("envelope_max_ratio", fmt(env.max_ratio));
        r.report.emplace_back("envelope_holds", env.holds ? "true" : "false");
    }
    return r;
}

RunResult run_parallel(const Scenario& sc) {
    const WaveguideArrayConfig& w = *sc.array;
    Eigen::VectorXcd c0 = Eigen::VectorXcd::Zero(w.n_waveguides);
    if (sc.initial.empty()) {
        c0(0) = 1.0;
    } else {
        for (int k = 0; k < w.n_waveguides; ++k) c0(k) = sc.initial[static_cast<std::size_t>(k)];
    }
    Table t;
    for (int k = 0; k < w.n_waveguides; ++k) t.names.push_back("wg" + std::to_string(k + 1) + "_pop");
    t.names.push_back("norm");
    std::vector<std::vector<double>> series(static_cast<std::size_t>(w.n_waveguides));
    for (int i = 0; i <= sc.samples; ++i) {
        const double time = sc.t_end * i / sc.samples;
        const Eigen::VectorXcd c = propagate_single_excitation(w, c0, time);
        std::vector<double> row;
        for (int k = 0; k < w.n_waveguides; ++k) {
            row.push_back(std::norm(c(k)));
            series[static_cast<std::size_t>(k)].push_back(std::norm(c(k)));
        }
        row.push_back(c.squaredNorm());
        t.times.push_back(time);
        t.rows.push_back(std::move(row));
    }
    const std::vector<double> times = t.times;
    const std::vector<std::string> defaults = t.names;
    RunResult r = select(sc, std::move(t), defaults);
    std::string poles;
    for (const auto& p : characteristic_poles(w)) poles += (poles.empty() ? "" : "; ") + fmt(p);
    r.report.emplace_back("poles", poles);
    for (int k = 0; k < w.n_waveguides; ++k)
        r.report.emplace_back("time_average_wg" + std::to_string(k + 1) + "_pop",
                              fmt(time_average(times, series[static_cast<std::size_t>(k)])));
    if (sc.system) r.report.emplace_back("no_photon_criterion", no_photon_criterion(*sc.system) ? "true" : "false");
    return r;
}

void add_roots(const Scenario& sc, RunResult& r) {
    const SystemConfig& cfg = *sc.system;
    if (!cfg.resonant())
        throw ScenarioError("key '[roots] count': root location requires a time-invariant (zero-detuning) system", 0);
    const auto roots = rightmost_roots(QuasiPolynomial::from_config(cfg), *sc.roots_count, sc.roots_nodes);
    r.report.emplace_back("roots_found", std::to_string(roots.size()));
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const auto& x = roots[i];
        r.report.emplace_back("root_" + std::to_string(i),
                              fmt(x.s) + " | multiplicity " + std::to_string(x.multiplicity) + " | residual " +
                                  fmt(x.residual) + " | converged " + (x.converged ? "true" : "false"));
    }
}

}  // namespace

RunResult run_scenario(const Scenario& sc, const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    RunResult r;
    switch (sc.mode) {
        case Mode::full_sim: r = run_full(sc, opts); break;
        case Mode::reduced_delay: r = run_reduced(sc); break;
        case Mode::analytic: r = run_analytic(sc); break;
        case Mode::stability: r = run_stability(sc); break;
        case Mode::parallel_single: r = run_parallel(sc); break;
    }
    add_final_values(r);
    if (sc.roots_count) add_roots(sc, r);
    r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void write_csv(const std::string& path, const RunResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "t";
    for (const auto& c : r.columns) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        out << fmt(r.times[i]);
        for (double v : r.values[i]) out << ',' << fmt(v);
        out << '\n';
    }
}

void write_svg(const std::string& path, const std::string& title, const RunResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const double W = 900, H = 500, left = 70, right = 200, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    double t0 = r.times.empty() ? 0.0 : r.times.front();
    double t1 = r.times.empty() ? 1.0 : r.times.back();
    if (t1 <= t0) t1 = t0 + 1.0;
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& row : r.values)
        for (double v : row) {
            if (!std::isfinite(v)) continue;
            if (first) {
                lo = hi = v;
                first = false;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi - lo < 1e-12) {
        hi += 0.5;
        lo -= 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto X = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
    auto Y = [&](double v) { return top + (hi - v) / (hi - lo) * ph; };

    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = lo + (hi - lo) * i / 4.0;
        const double t = t0 + (t1 - t0) * i / 4.0;
        out << "<text x=\"" << left - 6 << "\" y=\"" << Y(v) + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(std::round(v * 1e4) / 1e4)
            << "</text>\n";
        out << "<text x=\"" << X(t) << "\" y=\"" << top + ph + 18
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
            << fmt(std::round(t * 1e3) / 1e3) << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";
    const std::size_t stride = std::max<std::size_t>(1, r.times.size() / 2000);
    for (std::size_t c = 0; c < r.columns.size(); ++c) {
        const char* color = colors[c % 10];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < r.times.size(); i += stride) {
            const double v = r.values[i][c];
            if (std::isfinite(v)) out << X(r.times[i]) << ',' << Y(v) << ' ';
        }
        if (!r.times.empty() && (r.times.size() - 1) % stride != 0)
            out << X(r.times.back()) << ',' << Y(r.values.back()[c]);
        out << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(c);
        out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 36 << "\" y2=\""
            << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << r.columns[c] << "</text>\n";
    }
    out << "</svg>\n";
}

void write_report(const std::string& path, const Scenario& sc, const RunResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    std::string cols = "t";
    for (const auto& c : r.columns) cols += ", " + c;
    out << "name = " << sc.name << '\n';
    out << "mode = " << to_string(sc.mode) << '\n';
    if (!sc.description.empty()) out << "description = " << sc.description << '\n';
    out << "columns = " << cols << '\n';
    out << "samples = " << r.times.size() << '\n';
    out << "elapsed_seconds = " << fmt(r.elapsed) << '\n';
    if (sc.runtime_budget > 0.0) {
        out << "runtime_budget_seconds = " << fmt(sc.runtime_budget) << '\n';
        out << "within_runtime_budget = " << (r.elapsed <= sc.runtime_budget ? "true" : "false") << '\n';
    }
    if (sc.system) {
        const SystemConfig& c = *sc.system;
        out << "n_levels = " << c.n_levels << '\n';
        out << "ladder = " << to_string(c.ladder) << '\n';
        out << "g0 = " << fmt(c.g0) << '\n';
        out << "delta0 = " << fmt(c.delta0) << '\n';
        out << "tau = " << fmt(c.tau) << '\n';
        out << "feedback_phase = " << fmt(c.feedback_phase()) << '\n';
    }
    for (const auto& [k, v] : r.report) out << k << " = " << v << '\n';
}

std::vector<ScenarioListing> list_scenarios(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::invalid_argument("scenario directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".scn") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<ScenarioListing> out;
    for (const auto& f : files) {
        ScenarioListing l;
        l.file = f.filename().string();
        try {
            const Scenario sc = load_scenario(f.string());
            l.name = sc.name;
            l.mode = to_string(sc.mode);
            l.description = sc.description;
        } catch (const std::exception& e) {
            l.name = f.stem().string();
            l.error = e.what();
        }
        out.push_back(std::move(l));
    }
    return out;
}

std::string default_scenario_dir() {
    if (const char* env = std::getenv("QFS_SCENARIO_DIR"); env && *env) return env;
    return QFS_SCENARIO_DIR;
}

std::string resolve_scenario(const std::string& arg, const std::string& dir) {
    if (fs::is_regular_file(arg)) return arg;
    const fs::path preset = fs::path(dir) / (arg + ".scn");
    if (fs::is_regular_file(preset)) return preset.string();
    throw ScenarioError("no scenario file or preset named '" + arg + "' (searched " + dir + ")", 0);
}

}  // namespace qfs
