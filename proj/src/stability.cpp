// stability.cpp: LMI assembly, certificate checks and the heuristic certificate search.

#include "qfs/stability.hpp"

#include <string>
#include <vector>

namespace qfs {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_spd(const Eigen::MatrixXd& m, const char* name) {
    require(m.rows() == m.cols() && m.rows() > 0, std::string(name) + " must be square and non-empty");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, std::string(name) + " must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    require(es.eigenvalues()(0) > 0.0, std::string(name) + " must be positive definite");
}

double lambda_max(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

}  // namespace

StabilityCertificate make_certificate(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, double beta, double tau) {
    require_spd(p, "P");
    require_spd(q, "Q");
    require(p.rows() == q.rows(), "P and Q must have equal size");
    require(beta >= 0.0 && std::isfinite(beta), "beta must be finite and >= 0");
    require(tau > 0.0, "tau must be > 0");
    StabilityCertificate c;
    c.p = p;
    c.q = q;
    c.beta = beta;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(p, Eigen::EigenvaluesOnly);
    c.alpha1 = ep.eigenvalues()(0);
    c.alpha2 = ep.eigenvalues()(ep.eigenvalues().size() - 1) + tau * lambda_max(q);
    return c;
}

Eigen::MatrixXd assemble_lmi(const RealDelaySystem& sys, const StabilityCertificate& cert, bool detuned) {
    const Eigen::Index n = sys.a0.rows();
    require(cert.p.rows() == n && cert.q.rows() == n, "certificate size does not match the system");
    const Eigen::MatrixXd& p = cert.p;
    Eigen::MatrixXd m(2 * n, 2 * n);
    m.topLeftCorner(n, n) = p * sys.a0 + sys.a0.transpose() * p + cert.q + 2.0 * cert.beta * p;
    m.topRightCorner(n, n) = p * sys.b;
    m.bottomLeftCorner(n, n) = sys.b.transpose() * p;
    m.bottomRightCorner(n, n) = -std::exp(-2.0 * cert.beta * sys.tau) * cert.q;
    if (detuned && sys.upsilon_bound > 0.0)
        m.diagonal().array() += 2.0 * lambda_max(p) * sys.upsilon_bound;
    return m;
}

CertificateCheck check_certificate(const RealDelaySystem& sys, const StabilityCertificate& cert, bool detuned) {
    require_spd(cert.p, "P");
    require_spd(cert.q, "Q");
    require(detuned || sys.time_invariant(), "time-varying system requires the detuned check");
    const Eigen::MatrixXd m = assemble_lmi(sys, cert, detuned);
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    CertificateCheck c;
    c.margin = -lambda_max(sym);
    c.certified = c.margin > lmi_tolerance;
    return c;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
    require(a.rows() == a.cols() && c.rows() == a.rows() && c.cols() == a.cols(),
            "solve_lyapunov: A and C must be square and equal size");
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
    // vec(AᵀP) = (I ⊗ Aᵀ) vec P, vec(PA) = (Aᵀ ⊗ I) vec P
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            k.block(i * n, j * n, n, n) += id(i, j) * a.transpose();
            k.block(i * n, j * n, n, n) += a(j, i) * id;
        }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(c.data(), n * n);
    const Eigen::VectorXd x = k.fullPivLu().solve(rhs);
    Eigen::MatrixXd p = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
    return 0.5 * (p + p.transpose());
}

bool is_hurwitz(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    return es.eigenvalues().real().maxCoeff() < 0.0;
}

std::optional<StabilityCertificate> search_certificate(const RealDelaySystem& sys, bool detuned,
                                                       const SearchOptions& opts) {
    require(detuned || sys.time_invariant(), "time-varying system requires the detuned search");
    require(opts.q_points >= 1 && opts.q_min > 0.0 && opts.q_max >= opts.q_min, "invalid search grid");
    const Eigen::Index n = sys.a0.rows();
    const Eigen::MatrixXd closed = sys.a0 + sys.b;

    // Lyapunov seed first, identity as a fallback candidate
    std::vector<Eigen::MatrixXd> seeds;
    if (is_hurwitz(closed)) {
        const Eigen::MatrixXd seed = solve_lyapunov(closed, Eigen::MatrixXd::Identity(n, n));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(seed, Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) > 0.0) seeds.push_back(seed);
    }
    seeds.push_back(Eigen::MatrixXd::Identity(n, n));

    std::optional<StabilityCertificate> best;
    for (const Eigen::MatrixXd& p : seeds)
        for (int i = 0; i < opts.q_points; ++i) {
            const double frac = opts.q_points == 1 ? 0.0 : static_cast<double>(i) / (opts.q_points - 1);
            const double q = opts.q_min * std::pow(opts.q_max / opts.q_min, frac);
            const Eigen::MatrixXd qm = q * Eigen::MatrixXd::Identity(n, n);
            auto certified = [&](double beta) {
                return check_certificate(sys, make_certificate(p, qm, beta, sys.tau), detuned).certified;
            };
            if (!certified(0.0)) continue;
            double lo = 0.0;
            double hi = 1e-3;
            while (hi < 1e6 && certified(hi)) {
                lo = hi;
                hi *= 2.0;
            }
            if (hi >= 1e6) continue;
            for (int k = 0; k < opts.bisection_steps; ++k) {
                const double mid = 0.5 * (lo + hi);
                (certified(mid) ? lo : hi) = mid;
            }
            if (lo > 0.0 && (!best || lo > best->beta)) best = make_certificate(p, qm, lo, sys.tau);
        }
    return best;
}

}  // namespace qfs
