// stability.hpp: Lyapunov-Krasovskii LMI certificates for ẋ = A(t)x + B x(t-τ) and envelope checks.

#pragma once

#include "qfs/dde.hpp"
#include "qfs/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

namespace qfs {

// Strict negativity threshold on λ_max of the assembled LMI.
inline constexpr double lmi_tolerance = 1e-10;

struct StabilityCertificate {
    Eigen::MatrixXd p;
    Eigen::MatrixXd q;
    double beta = 0.0;
    double alpha1 = 0.0;  // λ_min(P)
    double alpha2 = 0.0;  // λ_max(P) + τ·λ_max(Q)

    // sqrt(α2/α1).
    double chi() const { return std::sqrt(alpha2 / alpha1); }
};

// Fills α1, α2 from (P, Q, τ). Throws if P or Q is not symmetric positive definite.
StabilityCertificate make_certificate(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, double beta, double tau);

// [[PA0 + A0ᵀP + Q + 2βP, PB], [BᵀP, -e^{-2βτ}Q]], plus 2λ_max(P)·Υ_sup·I when detuned.
Eigen::MatrixXd assemble_lmi(const RealDelaySystem& sys, const StabilityCertificate& cert, bool detuned);

struct CertificateCheck {
    bool certified = false;
    double margin = 0.0;  // -λ_max of the assembled matrix
};

// Throws if P or Q is indefinite, or if a time-varying system is checked with detuned = false.
CertificateCheck check_certificate(const RealDelaySystem& sys, const StabilityCertificate& cert, bool detuned);

// Solves AᵀP + PA = -C for P (Kronecker form).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c);

bool is_hurwitz(const Eigen::MatrixXd& a);

struct SearchOptions {
    double q_min = 1e-4;
    double q_max = 1e2;
    int q_points = 31;
    int bisection_steps = 40;
};

// P from the Lyapunov seed and the identity, Q = qI over a log grid, β by doubling then bisection.
// Returns the largest β found.
std::optional<StabilityCertificate> search_certificate(const RealDelaySystem& sys, bool detuned,
                                                       const SearchOptions& opts = {});

struct EnvelopeReport {
    double chi = 0.0;
    double max_ratio = 0.0;  // max_t ‖X(t)‖ / (χ e^{-βt} |φ|)
    double worst_time = 0.0;
    std::size_t violations = 0;
    bool holds = false;       // max_ratio ≤ 1 + 1e-9
};

// Checks ‖X(t)‖ ≤ χ e^{-βt} |φ| at every sample; |φ| is the sup-norm of the initial history.
template <class Scalar>
EnvelopeReport verify_envelope(const Trajectory<Scalar>& traj, const StabilityCertificate& cert,
                               double history_norm = 1.0) {
    if (!(cert.alpha1 > 0.0) || !(cert.alpha2 > 0.0))
        throw std::invalid_argument("verify_envelope: certificate constants must be positive");
    EnvelopeReport r;
    r.chi = cert.chi();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double bound = r.chi * std::exp(-cert.beta * traj.times[k]) * history_norm;
        const double ratio = traj.norm(k) / bound;
        if (ratio > r.max_ratio) {
            r.max_ratio = ratio;
            r.worst_time = traj.times[k];
        }
        if (ratio > 1.0 + 1e-9) ++r.violations;
    }
    r.holds = r.violations == 0;
    return r;
}

}  // namespace qfs
