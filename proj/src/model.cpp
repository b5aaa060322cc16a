// model.cpp: configuration validation and matrix builders.

#include "qfs/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qfs {

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

std::string to_string(LadderScaling s) {
    return s == LadderScaling::bosonic ? "bosonic" : "unit";
}

LadderScaling ladder_scaling_from_string(const std::string& s) {
    if (s == "bosonic") return LadderScaling::bosonic;
    if (s == "unit") return LadderScaling::unit;
    throw std::invalid_argument("ladder scaling must be 'bosonic' or 'unit', got '" + s + "'");
}

double SystemConfig::kappa() const {
    return pi * g0 * g0 / (2.0 * field_speed);
}

double SystemConfig::ladder_factor(int m) const {
    return ladder == LadderScaling::bosonic ? std::sqrt(static_cast<double>(m)) : 1.0;
}

double SystemConfig::chain_coupling(int j) const {
    return ladder_factor(j) * gamma.at(static_cast<std::size_t>(n_levels - j - 1));
}

double SystemConfig::chain_detuning(int j) const {
    return delta.at(static_cast<std::size_t>(n_levels - j - 1));
}

bool SystemConfig::resonant() const {
    return std::all_of(delta.begin(), delta.end(), [](double d) { return d == 0.0; });
}

void SystemConfig::validate() const {
    require(n_levels >= 2, "n_levels must be >= 2");
    require(gamma.size() == static_cast<std::size_t>(n_levels - 1),
            "gamma must have n_levels-1 entries");
    require(delta.size() == static_cast<std::size_t>(n_levels - 1),
            "delta must have n_levels-1 entries");
    require(all_finite(gamma) && all_finite(delta), "gamma and delta must be finite");
    require(std::all_of(gamma.begin(), gamma.end(), [](double g) { return g >= 0.0; }),
            "gamma entries must be non-negative");
    require(std::isfinite(g0) && g0 >= 0.0, "g0 must be finite and >= 0");
    require(std::isfinite(delta0) && delta0 > 0.0, "delta0 must be finite and > 0");
    require(std::isfinite(tau) && tau > 0.0, "tau must be finite and > 0");
    require(std::isfinite(field_speed) && field_speed > 0.0, "field_speed must be finite and > 0");
}

double g0_for_kappa(double kappa, double field_speed) {
    if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
    return std::sqrt(2.0 * field_speed * kappa / pi);
}

SystemConfig make_config(int n_levels, std::vector<double> gamma, double g0, double delta0,
                         double tau, LadderScaling ladder) {
    SystemConfig cfg;
    cfg.n_levels = n_levels;
    cfg.gamma = std::move(gamma);
    cfg.delta.assign(static_cast<std::size_t>(std::max(n_levels - 1, 0)), 0.0);
    cfg.g0 = g0;
    cfg.delta0 = delta0;
    cfg.tau = tau;
    cfg.ladder = ladder;
    cfg.validate();
    return cfg;
}

void WaveguideArrayConfig::validate() const {
    require(n_waveguides >= 1, "n_waveguides must be >= 1");
    require(couplings.size() == static_cast<std::size_t>(n_waveguides - 1),
            "couplings must have n_waveguides-1 entries");
    require(propagation.size() == static_cast<std::size_t>(n_waveguides),
            "propagation must have n_waveguides entries");
    require(all_finite(couplings) && all_finite(propagation),
            "array couplings and propagation constants must be finite");
}

int BasisIndex::waveguide_photons() const {
    int n = 0;
    for (const auto& w : waveguide_modes) n += static_cast<int>(w.size());
    return n;
}

void BasisIndex::validate(int n_levels) const {
    require(j >= 0 && j < n_levels, "basis index j out of range");
    require(m >= 0 && m <= j, "basis index requires 0 <= m <= j");
    require(waveguide_photons() == j - m, "waveguide photon count must equal j - m");
    for (const auto& w : waveguide_modes)
        require(std::is_sorted(w.begin(), w.end()), "waveguide mode multisets must be sorted");
}

std::vector<std::vector<int>> photon_distributions(int photons, int n_waveguides) {
    std::vector<std::vector<int>> out;
    if (n_waveguides < 1 || photons < 0) return out;
    std::vector<int> cur(static_cast<std::size_t>(n_waveguides), 0);
    std::function<void(int, int)> rec = [&](int w, int left) {
        if (w == n_waveguides - 1) {
            cur[static_cast<std::size_t>(w)] = left;
            out.push_back(cur);
            return;
        }
        for (int k = left; k >= 0; --k) {
            cur[static_cast<std::size_t>(w)] = k;
            rec(w + 1, left - k);
        }
    };
    rec(0, photons);
    return out;
}

std::size_t weak_composition_count(int photons, int n_waveguides) {
    // C(n + W - 1, W - 1)
    std::size_t n = static_cast<std::size_t>(photons + n_waveguides - 1);
    std::size_t k = static_cast<std::size_t>(n_waveguides - 1);
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

DelaySystem build_cavity_delay_system(const SystemConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_levels;
    const double kappa = cfg.kappa();

    DelaySystem sys;
    sys.dim = n;
    sys.tau = cfg.tau;
    sys.a0 = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 1; j < n; ++j) {
        const double e = cfg.chain_coupling(j);
        sys.a0(j - 1, j) = kI * e;
        sys.a0(j, j - 1) = kI * e;
        sys.a0(j, j) = -kappa;
    }
    sys.b = Eigen::MatrixXcd::Zero(n, n);
    const cdouble feedback = kappa * std::exp(kI * cfg.feedback_phase());
    for (int j = 1; j < n; ++j) sys.b(j, j) = feedback;

    if (!cfg.resonant()) {
        const Eigen::MatrixXcd a0 = sys.a0;
        sys.a_of_t = [cfg, a0](double t) {
            Eigen::MatrixXcd a = a0;
            for (int j = 1; j < cfg.n_levels; ++j) {
                const double e = cfg.chain_coupling(j);
                const double d = cfg.chain_detuning(j);
                a(j - 1, j) = kI * e * std::exp(kI * d * t);
                a(j, j - 1) = kI * e * std::exp(-kI * d * t);
            }
            return a;
        };
        sys.upsilon_bound = upsilon_sup_bound(cfg);
    }
    sys.history = [n](double) {
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
        x(0) = 1.0;
        return x;
    };
    return sys;
}

Eigen::MatrixXd embed(const Eigen::MatrixXcd& m) {
    Eigen::MatrixXd r(2 * m.rows(), 2 * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double x = m(i, j).real();
            const double y = m(i, j).imag();
            r(2 * i, 2 * j) = x;
            r(2 * i, 2 * j + 1) = -y;
            r(2 * i + 1, 2 * j) = y;
            r(2 * i + 1, 2 * j + 1) = x;
        }
    }
    return r;
}

Eigen::VectorXd embed(const Eigen::VectorXcd& v) {
    Eigen::VectorXd r(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        r(2 * i) = v(i).real();
        r(2 * i + 1) = v(i).imag();
    }
    return r;
}

Eigen::VectorXcd unembed(const Eigen::VectorXd& v) {
    if (v.size() % 2 != 0) throw std::invalid_argument("unembed: odd-length vector");
    Eigen::VectorXcd r(v.size() / 2);
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = cdouble(v(2 * i), v(2 * i + 1));
    return r;
}

RealDelaySystem build_real_embedding(const DelaySystem& sys) {
    RealDelaySystem r;
    r.dim = 2 * sys.dim;
    r.tau = sys.tau;
    r.a0 = embed(sys.a0);
    r.b = embed(sys.b);
    r.upsilon_bound = sys.upsilon_bound;
    if (sys.a_of_t) {
        auto a = sys.a_of_t;
        r.a_of_t = [a](double t) { return embed(a(t)); };
    }
    auto h = sys.history;
    r.history = [h](double t) { return embed(h(t)); };
    return r;
}

RealDelaySystem make_real_delay_system(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tau) {
    if (a.rows() != a.cols() || b.rows() != a.rows() || b.cols() != a.cols())
        throw std::invalid_argument("make_real_delay_system: A and B must be square and equal size");
    if (!(tau > 0.0)) throw std::invalid_argument("make_real_delay_system: tau must be > 0");
    RealDelaySystem r;
    r.dim = static_cast<int>(a.rows());
    r.a0 = a;
    r.b = b;
    r.tau = tau;
    const int n = r.dim;
    r.history = [n](double) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        x(0) = 1.0;
        return x;
    };
    return r;
}

Eigen::Matrix2d rotation_block(double delta, double t) {
    const double s = std::sin(delta * t);
    const double c = std::cos(delta * t);
    Eigen::Matrix2d r;
    r << s, -c, c, s;
    return r;
}

Eigen::Matrix2d delay_rotation(double phase) {
    const double s = std::sin(phase);
    const double c = std::cos(phase);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

Eigen::MatrixXd upsilon_matrix(const SystemConfig& cfg, double t) {
    DelaySystem sys = build_cavity_delay_system(cfg);
    const Eigen::MatrixXcd d = sys.a(t) - sys.a0;
    return embed(d);
}

double upsilon_norm(const SystemConfig& cfg, double t) {
    cfg.validate();
    const int n = cfg.n_levels;
    auto term = [&](int j) {
        if (j < 1 || j > n - 1) return 0.0;
        const double e = cfg.chain_coupling(j);
        return 2.0 * e * e * (1.0 - std::cos(cfg.chain_detuning(j) * t));
    };
    double best = 0.0;
    for (int r = 0; r < n; ++r) best = std::max(best, term(r) + term(r + 1));
    return std::sqrt(best);
}

double upsilon_norm_bruteforce(const SystemConfig& cfg, double t) {
    const Eigen::MatrixXd u = upsilon_matrix(cfg, t);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(u);
    return svd.singularValues()(0);
}

double upsilon_sup_bound(const SystemConfig& cfg) {
    const int n = cfg.n_levels;
    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n, n);
    for (int j = 1; j < n; ++j) {
        if (cfg.chain_detuning(j) == 0.0) continue;
        chain(j - 1, j) = chain(j, j - 1) = cfg.chain_coupling(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(chain, Eigen::EigenvaluesOnly);
    return 2.0 * es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd build_gw_matrix(const WaveguideArrayConfig& wcfg) {
    wcfg.validate();
    const int w = wcfg.n_waveguides;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(w, w);
    for (int i = 0; i < w; ++i) g(i, i) = wcfg.propagation[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < w; ++i)
        g(i, i + 1) = g(i + 1, i) = wcfg.couplings[static_cast<std::size_t>(i)];
    return g;
}

}  // namespace qfs
