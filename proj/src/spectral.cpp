// spectral.cpp: three-level Laplace oracles, residue inversion and pseudospectral root location.

#include "qfs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qfs {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::vector<cdouble> trimmed(std::vector<cdouble> c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    return c;
}

// Product of two truncated power series.
std::vector<cdouble> series_mul(const std::vector<cdouble>& a, const std::vector<cdouble>& b, std::size_t n) {
    std::vector<cdouble> r(n, 0.0);
    for (std::size_t i = 0; i < n && i < a.size(); ++i)
        for (std::size_t j = 0; i + j < n && j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// Effective chain couplings e1 = row 1, e2 = row 2 of a three-level system.
void three_level_couplings(const SystemConfig& cfg, double& e1, double& e2) {
    cfg.validate();
    require(cfg.n_levels == 3, "three-level oracle requires n_levels == 3");
    e1 = cfg.chain_coupling(1);
    e2 = cfg.chain_coupling(2);
}

}  // namespace

std::string to_string(Regime r) {
    switch (r) {
        case Regime::short_delay_resonant: return "short_delay_resonant";
        case Regime::short_delay_generic: return "short_delay_generic";
        case Regime::long_delay: return "long_delay";
    }
    return "";
}

Regime regime_from_string(const std::string& s) {
    if (s == "short_delay_resonant") return Regime::short_delay_resonant;
    if (s == "short_delay_generic") return Regime::short_delay_generic;
    if (s == "long_delay") return Regime::long_delay;
    throw std::invalid_argument("unknown regime '" + s + "'");
}

double phase_distance_to_2npi(double phase) {
    const double r = std::remainder(phase, 2.0 * pi);
    return std::abs(r);
}

ThreeLevelAmplitudes analytic_three_level(const SystemConfig& cfg, Regime regime, double t) {
    double e1, e2;
    three_level_couplings(cfg, e1, e2);
    require(cfg.resonant(), "analytic_three_level requires all detunings zero");
    const double kappa = cfg.kappa();
    if (regime != Regime::long_delay)
        require(kappa * cfg.tau < short_delay_limit,
                "short-delay regime requires kappa*tau < " + std::to_string(short_delay_limit));

    if (regime == Regime::short_delay_resonant) {
        require(phase_distance_to_2npi(cfg.feedback_phase()) < 1e-9,
                "short_delay_resonant requires delta0*tau = 2*n*pi");
        const double w2 = e1 * e1 + e2 * e2;
        if (w2 == 0.0) return {1.0, 0.0, 0.0};
        const double w = std::sqrt(w2);
        return {(e2 * e2 + e1 * e1 * std::cos(w * t)) / w2, kI * (e1 / w) * std::sin(w * t),
                (e1 * e2 / w2) * (std::cos(w * t) - 1.0)};
    }

    const cdouble k = regime == Regime::long_delay
                          ? cdouble(kappa)
                          : kappa * (1.0 - std::exp(kI * cfg.feedback_phase()));
    const std::vector<cdouble> den{e1 * e1 * k, k * k + e1 * e1 + e2 * e2, 2.0 * k, 1.0};
    const std::vector<cdouble> n0{k * k + e2 * e2, 2.0 * k, 1.0};
    const std::vector<cdouble> n1{kI * e1 * k, kI * e1};
    const std::vector<cdouble> n2{-e1 * e2};
    return {inverse_laplace_rational(n0, den, t), inverse_laplace_rational(n1, den, t),
            inverse_laplace_rational(n2, den, t)};
}

FinalValues final_values(const SystemConfig& cfg) {
    double e1, e2;
    three_level_couplings(cfg, e1, e2);
    require(cfg.resonant(), "final_values requires all detunings zero");
    const double kappa = cfg.kappa();
    require(kappa * cfg.tau < short_delay_limit,
            "final_values requires the short-delay regime kappa*tau < " + std::to_string(short_delay_limit));
    FinalValues f;
    if (kappa == 0.0 || phase_distance_to_2npi(cfg.feedback_phase()) < 1e-9) {
        f.oscillatory = true;
        f.waveguide_photons = 0;
        return f;
    }
    f.oscillatory = false;
    f.limits = {0.0, 0.0, 0.0};
    f.waveguide_photons = cfg.n_levels - 1;
    return f;
}

cdouble polynomial_eval(const std::vector<cdouble>& coeffs, cdouble s) {
    cdouble r = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * s + *it;
    return r;
}

std::vector<cdouble> polynomial_roots(const std::vector<cdouble>& coeffs) {
    const std::vector<cdouble> c = trimmed(coeffs);
    require(!c.empty(), "polynomial_roots: zero polynomial");
    const int n = static_cast<int>(c.size()) - 1;
    if (n == 0) return {};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) comp(0, j) = -c[static_cast<std::size_t>(n - 1 - j)] / c.back();
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    const Eigen::VectorXcd ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

cdouble inverse_laplace_rational(const std::vector<cdouble>& num_in, const std::vector<cdouble>& den_in, double t,
                                 double cluster_tol) {
    const std::vector<cdouble> num = trimmed(num_in);
    const std::vector<cdouble> den = trimmed(den_in);
    require(den.size() >= 2, "inverse_laplace_rational: denominator degree must be >= 1");
    if (num.empty()) return 0.0;
    require(num.size() < den.size(), "inverse_laplace_rational: requires deg num < deg den");

    const std::vector<cdouble> roots = polynomial_roots(den);
    const cdouble lead = den.back();
    std::vector<int> cluster(roots.size(), -1);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (cluster[i] >= 0) continue;
        cluster[i] = static_cast<int>(groups.size());
        groups.push_back({i});
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (cluster[j] < 0 && std::abs(roots[i] - roots[j]) < cluster_tol * (1.0 + std::abs(roots[i]))) {
                cluster[j] = cluster[i];
                groups.back().push_back(j);
            }
    }

    cdouble f = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const std::size_t k = groups[g].size();
        cdouble r = 0.0;
        for (std::size_t i : groups[g]) r += roots[i];
        r /= static_cast<double>(k);

        // residue sum over the cluster is the divided difference h[r_1..r_k] of
        // h(s) = num(s) e^{st} / (lead Π_{others}(s - r_o)), expanded about the cluster mean
        double spread = 0.0, min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t i : groups[g]) spread = std::max(spread, std::abs(roots[i] - r));
        for (std::size_t o = 0; o < roots.size(); ++o)
            if (cluster[o] != static_cast<int>(g)) min_sep = std::min(min_sep, std::abs(r - roots[o]));
        std::size_t extra = 0;
        if (k > 1 && spread > 0.0) {
            const double q = spread * (std::abs(t) + 1.0) + spread / min_sep;
            double term = 1.0;
            while (extra < 60 && term * static_cast<double>(k + extra) > 1e-17) {
                ++extra;
                term *= q;
            }
        }
        const std::size_t len = k + extra;

        // Taylor coefficients of num at r
        std::vector<cdouble> ns(len, 0.0);
        for (std::size_t i = 0; i < len && i < num.size(); ++i) {
            cdouble acc = 0.0;
            double binom = 1.0;
            cdouble rp = 1.0;
            for (std::size_t l = i; l < num.size(); ++l) {
                acc += binom * num[l] * rp;
                binom = binom * static_cast<double>(l + 1) / static_cast<double>(l + 1 - i);
                rp *= r;
            }
            ns[i] = acc;
        }
        std::vector<cdouble> h = ns;
        for (auto& x : h) x /= lead;
        for (std::size_t o = 0; o < roots.size(); ++o) {
            if (cluster[o] == static_cast<int>(g)) continue;
            const cdouble d = r - roots[o];
            std::vector<cdouble> inv(len);
            cdouble p = 1.0 / d;
            for (std::size_t n = 0; n < len; ++n) {
                inv[n] = p;
                p *= -1.0 / d;
            }
            h = series_mul(h, inv, len);
        }
        std::vector<cdouble> ex(len);
        cdouble term = std::exp(r * t);
        for (std::size_t n = 0; n < len; ++n) {
            ex[n] = term;
            term *= t / static_cast<double>(n + 1);
        }
        h = series_mul(h, ex, len);

        // complete homogeneous symmetric polynomials of the offsets r_i - r
        std::vector<cdouble> hs(extra + 1, 0.0);
        hs[0] = 1.0;
        for (std::size_t i : groups[g]) {
            const cdouble d = roots[i] - r;
            for (std::size_t m = 1; m <= extra; ++m) hs[m] += d * hs[m - 1];
        }
        for (std::size_t m = 0; m <= extra; ++m) f += h[k - 1 + m] * hs[m];
    }
    return f;
}

QuasiPolynomial QuasiPolynomial::from_system(const RealDelaySystem& sys) {
    require(sys.time_invariant(), "quasi-polynomial requires a time-invariant system");
    QuasiPolynomial qp;
    qp.a = sys.a0;
    qp.b = sys.b;
    qp.tau = sys.tau;
    return qp;
}

QuasiPolynomial QuasiPolynomial::from_config(const SystemConfig& cfg) {
    return from_system(build_real_embedding(build_cavity_delay_system(cfg)));
}

Eigen::MatrixXcd QuasiPolynomial::matrix(cdouble s) const {
    Eigen::MatrixXcd m = -a.cast<cdouble>() - b.cast<cdouble>() * std::exp(-s * tau);
    m.diagonal().array() += s;
    return m;
}

cdouble QuasiPolynomial::determinant(cdouble s) const {
    return matrix(s).determinant();
}

Eigen::VectorXcd collocation_eigenvalues(const QuasiPolynomial& qp, int nodes) {
    require(nodes >= 2, "collocation needs at least 2 nodes");
    require(qp.a.rows() == qp.a.cols() && qp.b.rows() == qp.a.rows() && qp.b.cols() == qp.a.cols(),
            "quasi-polynomial matrices must be square and equal size");
    const int n = nodes;
    const Eigen::Index d = qp.a.rows();
    Eigen::VectorXd x(n + 1);
    for (int k = 0; k <= n; ++k) x(k) = std::cos(k * pi / n);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n + 1, n + 1);
    auto weight = [n](int k) { return (k == 0 || k == n ? 2.0 : 1.0) * (k % 2 ? -1.0 : 1.0); };
    for (int i = 0; i <= n; ++i) {
        double diag = 0.0;
        for (int j = 0; j <= n; ++j) {
            if (i == j) continue;
            D(i, j) = weight(i) / weight(j) / (x(i) - x(j));
            diag += D(i, j);
        }
        D(i, i) = -diag;
    }
    const Eigen::Index size = (n + 1) * d;
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(size, size);
    big.block(0, 0, d, d) = qp.a;
    big.block(0, n * d, d, d) += qp.b;
    const double scale = 2.0 / qp.tau;
    for (int k = 1; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
            big.block(k * d, j * d, d, d).diagonal().setConstant(scale * D(k, j));
    Eigen::EigenSolver<Eigen::MatrixXd> es(big, false);
    return es.eigenvalues();
}

namespace {

CharacteristicRoot refine(const QuasiPolynomial& qp, cdouble s0, int multiplicity) {
    CharacteristicRoot r;
    r.s = s0;
    r.multiplicity = multiplicity;
    r.initial_residual = std::abs(qp.determinant(s0));
    cdouble s = s0;
    bool done = false;
    for (int it = 0; it < 60 && !done; ++it) {
        r.iterations = it + 1;
        const Eigen::MatrixXcd m = qp.matrix(s);
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
        if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= 1e-15 * m.norm()) {
            done = true;  // singular to working precision
            break;
        }
        Eigen::MatrixXcd dm = qp.tau * qp.b.cast<cdouble>() * std::exp(-s * qp.tau);
        dm.diagonal().array() += 1.0;
        const cdouble tr = lu.solve(dm).trace();
        if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag())) {
            done = true;  // exactly singular: s is a root
            break;
        }
        const cdouble step = static_cast<double>(multiplicity) / tr;
        s -= step;
        if (std::abs(step) < 1e-13 * (1.0 + std::abs(s))) done = true;
    }
    r.s = s;
    const Eigen::MatrixXcd m = qp.matrix(s);
    r.residual = std::abs(m.determinant());
    // Hadamard bound scales the residual for roots far from the origin
    double hadamard = 1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) hadamard *= m.row(i).norm();
    r.converged = std::isfinite(r.residual) && (r.residual < 1e-8 || r.residual < 1e-13 * hadamard);
    return r;
}

}  // namespace

std::vector<CharacteristicRoot> rightmost_roots(const QuasiPolynomial& qp, int count, int nodes) {
    require(count >= 1, "rightmost_roots: count must be >= 1");
    require(nodes >= 4, "rightmost_roots: nodes must be >= 4");
    std::vector<CharacteristicRoot> out, rejected;
    for (int attempt = 0; attempt <= 2; ++attempt) {
        const int n = nodes << attempt;
        const Eigen::VectorXcd ev = collocation_eigenvalues(qp, n);
        std::vector<cdouble> sorted(ev.data(), ev.data() + ev.size());
        std::sort(sorted.begin(), sorted.end(), [](cdouble a, cdouble b) {
            return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
        });

        out.clear();
        rejected.clear();
        std::vector<bool> used(sorted.size(), false);
        for (std::size_t i = 0; i < sorted.size() && static_cast<int>(out.size()) < count; ++i) {
            if (used[i]) continue;
            int mult = 0;
            for (std::size_t j = i; j < sorted.size(); ++j)
                if (!used[j] && std::abs(sorted[j] - sorted[i]) < 1e-6 * (1.0 + std::abs(sorted[i]))) {
                    used[j] = true;
                    ++mult;
                }
            CharacteristicRoot r = refine(qp, sorted[i], mult);
            // seeds that do not converge nearby are collocation artifacts
            if (!r.converged || std::abs(r.s - sorted[i]) > 1e-2 * (1.0 + std::abs(sorted[i]))) {
                rejected.push_back(r);
                continue;
            }
            auto dup = std::find_if(out.begin(), out.end(), [&](const CharacteristicRoot& o) {
                return std::abs(o.s - r.s) < 1e-8 * (1.0 + std::abs(r.s));
            });
            if (dup != out.end()) {
                dup->multiplicity += r.multiplicity;
                continue;
            }
            out.push_back(r);
        }
        if (static_cast<int>(out.size()) >= count) break;
    }
    for (std::size_t i = 0; i < rejected.size() && static_cast<int>(out.size()) < count; ++i)
        if (!rejected[i].converged) out.push_back(rejected[i]);
    std::sort(out.begin(), out.end(), [](const CharacteristicRoot& a, const CharacteristicRoot& b) {
        return a.s.real() != b.s.real() ? a.s.real() > b.s.real() : a.s.imag() > b.s.imag();
    });
    return out;
}

DarkStateResult detuned_dark_state_check(const SystemConfig& cfg) {
    double e1, e2;
    three_level_couplings(cfg, e1, e2);
    const double d1 = cfg.delta[0];
    const double d2 = cfg.delta[1];
    DarkStateResult r;
    r.dark = phase_distance_to_2npi(cfg.feedback_phase()) <= 1e-9 && std::abs(d2 * e2 * e2 - d1 * e1 * e1) <= 1e-9;
    if (r.dark) {
        const double den = e1 * e1 + e2 * e2 + d1 * d2;
        r.mean = den != 0.0 ? e1 * d1 / den : 0.0;
    }
    return r;
}

}  // namespace qfs
