// spectral.hpp: Laplace-domain oracles, quasi-polynomial roots and the detuned dark-state test.

#pragma once

#include "qfs/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qfs {

enum class Regime { short_delay_resonant, short_delay_generic, long_delay };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

// κτ threshold below which e^{-sτ} ≈ 1 is accepted.
inline constexpr double short_delay_limit = 0.05;

struct ThreeLevelAmplitudes {
    cdouble c0;
    cdouble c11;
    cdouble c22;
};

// Distance of φ to the nearest multiple of 2π.
double phase_distance_to_2npi(double phase);

// Closed-form or residue-summed amplitudes of the three-level cavity subsystem.
// short_delay_resonant: Δ0τ = 2nπ, δ = 0, κτ < 0.05. short_delay_generic: δ = 0, κτ < 0.05.
// long_delay: δ = 0, the window before the first return (B = 0).
ThreeLevelAmplitudes analytic_three_level(const SystemConfig& cfg, Regime regime, double t);

struct FinalValues {
    bool oscillatory = false;
    ThreeLevelAmplitudes limits{};  // meaningful when !oscillatory
    int waveguide_photons = 0;
};

// Long-time behaviour in the short-delay regime of the resonant three-level system.
FinalValues final_values(const SystemConfig& cfg);

// Roots of Σ c_k s^k (ascending coefficients) via companion-matrix eigenvalues.
std::vector<cdouble> polynomial_roots(const std::vector<cdouble>& coeffs);
cdouble polynomial_eval(const std::vector<cdouble>& coeffs, cdouble s);

// f(t) = L^{-1}[num(s)/den(s)] by residue summation; roots closer than `cluster_tol` are merged
// and handled as a divided difference about the cluster mean. Requires deg num < deg den.
cdouble inverse_laplace_rational(const std::vector<cdouble>& num, const std::vector<cdouble>& den, double t,
                                 double cluster_tol = 1e-4);

// s ↦ det(sI - A - B e^{-sτ}).
struct QuasiPolynomial {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    double tau = 1.0;

    static QuasiPolynomial from_system(const RealDelaySystem& sys);
    static QuasiPolynomial from_config(const SystemConfig& cfg);

    Eigen::MatrixXcd matrix(cdouble s) const;
    cdouble determinant(cdouble s) const;
};

struct CharacteristicRoot {
    cdouble s;
    int multiplicity = 1;
    double initial_residual = 0.0;  // |det| at the collocation estimate
    double residual = 0.0;          // |det| after Newton refinement
    int iterations = 0;
    bool converged = false;
};

// Pseudospectral collocation on [-τ, 0] with Chebyshev nodes, then Newton refinement.
// Node count doubles (up to twice) while some candidate fails to converge.
std::vector<CharacteristicRoot> rightmost_roots(const QuasiPolynomial& qp, int count, int nodes = 40);

// Spectrum of the collocation matrix, unsorted.
Eigen::VectorXcd collocation_eigenvalues(const QuasiPolynomial& qp, int nodes);

struct DarkStateResult {
    bool dark = false;
    double mean = 0.0;
};

// Δ0τ = 2nπ and δ2·e2² = δ1·e1² within 1e-9, with e1, e2 the chain couplings of rows 1, 2.
DarkStateResult detuned_dark_state_check(const SystemConfig& cfg);

}  // namespace qfs
