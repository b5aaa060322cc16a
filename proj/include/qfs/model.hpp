// model.hpp: physical configuration, basis indexing and the matrices of the
// cavity delay system and the waveguide array.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace qfs {

using cdouble = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cdouble kI{0.0, 1.0};

// How the atom-cavity coupling scales with the cavity photon number m.
enum class LadderScaling {
    bosonic,  // √m · γ (harmonic cavity)
    unit      // γ, independent of m
};

std::string to_string(LadderScaling s);
LadderScaling ladder_scaling_from_string(const std::string& s);

// Physical parameters of the atom / cavity / waveguide network.
struct SystemConfig {
    int n_levels = 2;
    std::vector<double> gamma;   // γ_1 … γ_{N-1}
    std::vector<double> delta;   // δ_1 … δ_{N-1}
    double g0 = 0.0;
    double delta0 = 1.0;
    double tau = 1.0;
    double field_speed = 1.0;
    LadderScaling ladder = LadderScaling::bosonic;

    // Effective cavity-waveguide decay rate π·g0²/(2c).
    double kappa() const;
    // Δ0·τ.
    double feedback_phase() const { return delta0 * tau; }
    // Coupling prefactor for a transition that creates the m-th cavity photon.
    double ladder_factor(int m) const;
    // Effective coupling of row j (1 ≤ j ≤ N-1) of the cavity subsystem: factor(j)·γ_{N-j}.
    double chain_coupling(int j) const;
    // Detuning δ_{N-j} attached to row j.
    double chain_detuning(int j) const;
    bool resonant() const;

    // Throws std::invalid_argument on violated invariants.
    void validate() const;
};

// g0 that yields the requested κ for the given field speed.
double g0_for_kappa(double kappa, double field_speed = 1.0);

// Convenience constructor with all detunings zero.
SystemConfig make_config(int n_levels, std::vector<double> gamma, double g0, double delta0,
                         double tau, LadderScaling ladder = LadderScaling::bosonic);

// Nearest-neighbour coupled waveguide array.
struct WaveguideArrayConfig {
    int n_waveguides = 1;
    std::vector<double> couplings;     // K_{w,w+1}, length W-1
    std::vector<double> propagation;   // β_w, length W

    void validate() const;
};

// |atom level N-1-j, m cavity photons, waveguide photon modes⟩.
struct BasisIndex {
    int j = 0;
    int m = 0;
    std::vector<std::vector<int>> waveguide_modes;  // sorted mode indices per waveguide

    int waveguide_photons() const;
    void validate(int n_levels) const;
    bool operator==(const BasisIndex&) const = default;
};

// All ways to place `photons` indistinguishable photons in `n_waveguides` waveguides.
std::vector<std::vector<int>> photon_distributions(int photons, int n_waveguides);
// Binomial C(photons + W - 1, W - 1).
std::size_t weak_composition_count(int photons, int n_waveguides);

// Linear system ẋ = A(t)x + B x(t-τ) with initial history on [-τ, 0].
template <class Scalar>
struct LinearDelaySystem {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    int dim = 0;
    std::function<Matrix(double)> a_of_t;  // empty when A is constant
    Matrix a0;                             // time-invariant part of A(t)
    Matrix b;
    double tau = 1.0;
    double upsilon_bound = 0.0;            // bound on sup_t ‖A(t) - a0‖₂
    std::function<Vector(double)> history;

    Matrix a(double t) const { return a_of_t ? a_of_t(t) : a0; }
    bool time_invariant() const { return !a_of_t; }
};

using DelaySystem = LinearDelaySystem<cdouble>;
using RealDelaySystem = LinearDelaySystem<double>;

// Cavity subsystem X = [c_0, c^1_1, …, c^{N-1}_{N-1}] with history φ ≡ e_0.
DelaySystem build_cavity_delay_system(const SystemConfig& cfg);
// Interleaved (re, im) real form of a complex delay system.
RealDelaySystem build_real_embedding(const DelaySystem& sys);
// Constant-coefficient real system with history φ ≡ e_0.
RealDelaySystem make_real_delay_system(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tau);

Eigen::MatrixXd embed(const Eigen::MatrixXcd& m);
Eigen::VectorXd embed(const Eigen::VectorXcd& v);
Eigen::VectorXcd unembed(const Eigen::VectorXd& v);

// R_j(t) = [[sin δt, -cos δt], [cos δt, sin δt]].
Eigen::Matrix2d rotation_block(double delta, double t);
// P(τ) = [[cos φ, -sin φ], [sin φ, cos φ]] with φ = Δ0τ.
Eigen::Matrix2d delay_rotation(double phase);

// Υ(t) = Ã(t) - Ã0 assembled explicitly.
Eigen::MatrixXd upsilon_matrix(const SystemConfig& cfg, double t);
// max_j sqrt(Σ_{adjacent transitions} 2 e²(1 - cos δt)).
double upsilon_norm(const SystemConfig& cfg, double t);
// Largest singular value of upsilon_matrix.
double upsilon_norm_bruteforce(const SystemConfig& cfg, double t);
// Time-uniform bound on ‖Υ(t)‖₂.
double upsilon_sup_bound(const SystemConfig& cfg);

// Symmetric tridiagonal G_W with diagonal β_w and off-diagonal K_{w,w+1}.
Eigen::MatrixXd build_gw_matrix(const WaveguideArrayConfig& wcfg);

}  // namespace qfs
