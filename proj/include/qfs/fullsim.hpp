// fullsim.hpp: mode-resolved amplitude equations for the atom, cavity and waveguide network.

#pragma once

#include "qfs/dde.hpp"
#include "qfs/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace qfs {

// Raised when a configuration needs more amplitudes than the allowed budget.
struct BudgetError : std::invalid_argument {
    std::size_t required;
    BudgetError(const std::string& what, std::size_t n) : std::invalid_argument(what), required(n) {}
};

// Uniform frequency grid ω_k = center - Ω + kΔω, k = 0 … M-1.
struct ModeGrid {
    double center = 1.0;
    double half_width = 1.0;
    int n_modes = 2;

    double spacing() const { return 2.0 * half_width / (n_modes - 1); }
    double omega(int k) const { return center - half_width + k * spacing(); }
    double detuning(int k) const { return omega(k) - center; }
    // 2π/Δω, the time at which the discretized bath echoes.
    double recurrence_time() const;
    // Ω ≥ 6π/τ.
    bool resolves_delay(double tau) const;

    // Smallest grid on [center-Ω, center+Ω] whose recurrence time is at least 2·t_end.
    static ModeGrid for_horizon(double center, double half_width, double t_end);
    // Ω = max(40κ, 6π/τ) sized for t_end.
    static ModeGrid defaults(const SystemConfig& cfg, double t_end);

    // Throws std::invalid_argument if malformed or if the recurrence time does not exceed t_end.
    void validate(double t_end) const;
};

struct FullSimOptions {
    int sample_every = 1;
    std::size_t budget = 20'000'000;
    bool require_delay_resolution = false;
    bool store_states = false;
};

struct FullTrajectory {
    std::vector<double> times;
    // X = [y(0,0), y(1,1), …, y(N-1,N-1)], the amplitudes with no waveguide photons.
    std::vector<Eigen::VectorXcd> cavity;
    // Entry n: total population with n photons in the waveguides, n = 0 … N-1.
    std::vector<Eigen::VectorXd> photon_populations;
    // (w, n): population with exactly n photons in waveguide w.
    std::vector<Eigen::MatrixXd> waveguide_populations;
    std::vector<double> norm;
    // Full scaled amplitude vectors, only when FullSimOptions::store_states is set.
    std::vector<Eigen::VectorXcd> states;
    Eigen::VectorXcd final_state;
    std::size_t n_amplitudes = 0;

    std::size_t size() const { return times.size(); }
    Trajectory<cdouble> cavity_trajectory() const;
};

// One (waveguide, mode) photon.
struct Photon {
    int waveguide = 0;
    int mode = 0;
    auto operator<=>(const Photon&) const = default;
};

// Orthonormal Fock basis with at most two waveguide photons, stored as scaled amplitudes y.
// One photon: y = √μ·c. Two photons in one waveguide: y = √2·μ·c (p < q) or μ·c (p = q), packed.
// Two photons in waveguides w1 < w2: y = μ·c. μ = Δω / c.
class FullSpace {
public:
    enum class Kind { empty, single, same, pair };

    struct Sector {
        int j = 0;
        int m = 0;
        std::vector<int> distribution;  // photons per waveguide
        Kind kind = Kind::empty;
        int w1 = -1;
        int w2 = -1;
        std::size_t offset = 0;
        std::size_t size = 0;
    };

    FullSpace(int n_levels, int n_waveguides, int n_modes);

    std::size_t dimension() const { return dim_; }
    const std::vector<Sector>& sectors() const { return sectors_; }
    int n_levels() const { return n_levels_; }
    int n_waveguides() const { return n_waveguides_; }
    int n_modes() const { return n_modes_; }

    // Sector id for (j, m, distribution); -1 if absent.
    int find_sector(int j, int m, const std::vector<int>& distribution) const;
    // Flat index of a state; photons need not be sorted.
    std::size_t index(int j, int m, std::vector<Photon> photons) const;
    // Photons of the state at local index `local` in sector `s`, sorted.
    std::vector<Photon> photons(int s, std::size_t local) const;
    // Flat index of the no-photon amplitude y(j, j).
    std::size_t cavity_index(int j) const;
    // Count of amplitudes without building the space.
    static std::size_t count(int n_levels, int n_waveguides, int n_modes);

private:
    int n_levels_, n_waveguides_, n_modes_;
    std::size_t dim_ = 0;
    std::vector<Sector> sectors_;
    std::map<std::tuple<int, int, std::vector<int>>, int> lookup_;
};

// Sparse generator ẏ = Σ coef·phase(t)·y, with phases drawn from a small per-time table.
class FullGenerator {
public:
    FullGenerator(const SystemConfig& cfg, const WaveguideArrayConfig& wcfg, const ModeGrid& grid);

    const FullSpace& space() const { return space_; }
    std::size_t nonzeros() const { return col_.size(); }

    void phases(double t, std::vector<cdouble>& table) const;
    void apply(const std::vector<cdouble>& table, const Eigen::VectorXcd& y, Eigen::VectorXcd& out) const;
    Eigen::VectorXcd apply(double t, const Eigen::VectorXcd& y) const;
    // Dense generator at time t, for small spaces.
    Eigen::MatrixXcd dense(double t) const;

private:
    struct Term {
        std::size_t row, col;
        cdouble coef;
        int phase;
    };
    void add(std::size_t row, std::size_t col, cdouble coef, int phase);
    int emit_phase(int k) const { return 1 + space_.n_modes() + k; }
    int absorb_phase(int k) const { return 1 + k; }
    int atom_phase(int j, bool plus) const { return 1 + 2 * space_.n_modes() + 2 * (j - 1) + (plus ? 1 : 0); }

    FullSpace space_;
    std::vector<double> nu_;
    std::vector<double> atom_detuning_;
    std::vector<Term> terms_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<cdouble> coef_;
    std::vector<int> phase_;
};

// One waveguide; identical to simulate_waveguide_array with W = 1.
FullTrajectory simulate_single_waveguide(const SystemConfig& cfg, const ModeGrid& grid, double t_end,
                                         double h, const FullSimOptions& opts = {});

FullTrajectory simulate_waveguide_array(const SystemConfig& cfg, const WaveguideArrayConfig& wcfg,
                                        const ModeGrid& grid, double t_end, double h,
                                        const FullSimOptions& opts = {});

struct KernelReport {
    double max_deviation = 0.0;   // max|K - R| / (κ·max|c|) over [2τ, t_end]
    double max_kernel = 0.0;      // max|K|
    double max_reference = 0.0;   // max|R|
    double kappa = 0.0;
    bool grid_resolves_delay = false;
    int steps_per_delay = 0;
    std::vector<double> times;
    std::vector<cdouble> kernel;     // K(t)
    std::vector<cdouble> reference;  // R(t) = -κ[c(t) - e^{iΔ0τ}c(t-τ)]
};

// Memory integral of the discretized bath along a simulated N=2 trajectory vs the local-plus-delayed form.
KernelReport delay_kernel_check(const SystemConfig& cfg, const ModeGrid& grid, double t_end,
                                int steps_per_delay = 64);

}  // namespace qfs
