// fullsim.cpp: basis layout, sparse generator and RK4 driver for the mode-resolved equations.

#include "qfs/fullsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qfs {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::size_t packed_index(int p, int q, int m) {
    // p <= q
    const auto P = static_cast<std::size_t>(p);
    return P * static_cast<std::size_t>(m) - P * (P - 1) / 2 + static_cast<std::size_t>(q - p);
}

std::size_t sector_size(FullSpace::Kind kind, int n_modes) {
    const auto M = static_cast<std::size_t>(n_modes);
    switch (kind) {
        case FullSpace::Kind::empty: return 1;
        case FullSpace::Kind::single: return M;
        case FullSpace::Kind::same: return M * (M + 1) / 2;
        case FullSpace::Kind::pair: return M * M;
    }
    return 0;
}

FullSpace::Kind classify(const std::vector<int>& dist, int& w1, int& w2) {
    w1 = w2 = -1;
    int photons = 0;
    for (std::size_t w = 0; w < dist.size(); ++w) {
        photons += dist[w];
        for (int c = 0; c < dist[w]; ++c) (w1 < 0 ? w1 : w2) = static_cast<int>(w);
    }
    if (photons == 0) return FullSpace::Kind::empty;
    if (photons == 1) return FullSpace::Kind::single;
    if (photons == 2) {
        if (w2 == w1) return FullSpace::Kind::same;
        return FullSpace::Kind::pair;
    }
    throw std::invalid_argument("full simulation supports at most two waveguide photons (n_levels <= 3)");
}

int multiplicity(const std::vector<Photon>& ph, Photon x) {
    return static_cast<int>(std::count(ph.begin(), ph.end(), x));
}

void check_shape(int n_levels, int n_waveguides, int n_modes) {
    require(n_levels >= 2 && n_levels <= 3, "full simulation requires 2 <= n_levels <= 3");
    require(n_waveguides >= 1, "full simulation requires n_waveguides >= 1");
    require(n_modes >= 2, "full simulation requires n_modes >= 2");
}

}  // namespace

double ModeGrid::recurrence_time() const {
    return 2.0 * pi / spacing();
}

bool ModeGrid::resolves_delay(double tau) const {
    return half_width >= 6.0 * pi / tau * (1.0 - 1e-12);
}

ModeGrid ModeGrid::for_horizon(double center, double half_width, double t_end) {
    require(half_width > 0.0 && t_end > 0.0, "ModeGrid::for_horizon: half_width and t_end must be > 0");
    const double max_spacing = pi / t_end;
    ModeGrid g;
    g.center = center;
    g.half_width = half_width;
    g.n_modes = static_cast<int>(std::ceil(2.0 * half_width / max_spacing - 1e-9)) + 1;
    return g;
}

ModeGrid ModeGrid::defaults(const SystemConfig& cfg, double t_end) {
    cfg.validate();
    const double omega = std::max(40.0 * cfg.kappa(), 6.0 * pi / cfg.tau);
    return for_horizon(cfg.delta0, omega, t_end);
}

void ModeGrid::validate(double t_end) const {
    require(n_modes >= 2, "mode grid needs at least 2 modes");
    require(std::isfinite(center) && std::isfinite(half_width) && half_width > 0.0,
            "mode grid center and half_width must be finite, half_width > 0");
    require(recurrence_time() > t_end,
            "mode grid recurrence time 2*pi/d_omega = " + std::to_string(recurrence_time()) +
                " does not exceed t_end = " + std::to_string(t_end));
}

Trajectory<cdouble> FullTrajectory::cavity_trajectory() const {
    Trajectory<cdouble> t;
    t.times = times;
    t.states = cavity;
    return t;
}

FullSpace::FullSpace(int n_levels, int n_waveguides, int n_modes)
    : n_levels_(n_levels), n_waveguides_(n_waveguides), n_modes_(n_modes) {
    check_shape(n_levels, n_waveguides, n_modes);
    for (int j = 0; j < n_levels; ++j) {
        for (int m = j; m >= 0; --m) {
            for (const auto& dist : photon_distributions(j - m, n_waveguides)) {
                Sector s;
                s.j = j;
                s.m = m;
                s.distribution = dist;
                s.kind = classify(dist, s.w1, s.w2);
                s.offset = dim_;
                s.size = sector_size(s.kind, n_modes);
                dim_ += s.size;
                lookup_[{j, m, dist}] = static_cast<int>(sectors_.size());
                sectors_.push_back(std::move(s));
            }
        }
    }
}

std::size_t FullSpace::count(int n_levels, int n_waveguides, int n_modes) {
    check_shape(n_levels, n_waveguides, n_modes);
    std::size_t n = 0;
    for (int j = 0; j < n_levels; ++j)
        for (int m = j; m >= 0; --m)
            for (const auto& dist : photon_distributions(j - m, n_waveguides)) {
                int w1, w2;
                n += sector_size(classify(dist, w1, w2), n_modes);
            }
    return n;
}

int FullSpace::find_sector(int j, int m, const std::vector<int>& distribution) const {
    auto it = lookup_.find({j, m, distribution});
    return it == lookup_.end() ? -1 : it->second;
}

std::size_t FullSpace::index(int j, int m, std::vector<Photon> photons) const {
    std::vector<int> dist(static_cast<std::size_t>(n_waveguides_), 0);
    for (const auto& p : photons) {
        require(p.waveguide >= 0 && p.waveguide < n_waveguides_ && p.mode >= 0 && p.mode < n_modes_,
                "FullSpace::index: photon out of range");
        ++dist[static_cast<std::size_t>(p.waveguide)];
    }
    const int s = find_sector(j, m, dist);
    require(s >= 0, "FullSpace::index: no such sector");
    std::sort(photons.begin(), photons.end());
    const Sector& sec = sectors_[static_cast<std::size_t>(s)];
    switch (sec.kind) {
        case Kind::empty: return sec.offset;
        case Kind::single: return sec.offset + static_cast<std::size_t>(photons[0].mode);
        case Kind::same: return sec.offset + packed_index(photons[0].mode, photons[1].mode, n_modes_);
        case Kind::pair:
            return sec.offset + static_cast<std::size_t>(photons[0].mode) * static_cast<std::size_t>(n_modes_) +
                   static_cast<std::size_t>(photons[1].mode);
    }
    return 0;
}

std::vector<Photon> FullSpace::photons(int s, std::size_t local) const {
    const Sector& sec = sectors_.at(static_cast<std::size_t>(s));
    require(local < sec.size, "FullSpace::photons: local index out of range");
    const auto M = static_cast<std::size_t>(n_modes_);
    switch (sec.kind) {
        case Kind::empty: return {};
        case Kind::single: return {{sec.w1, static_cast<int>(local)}};
        case Kind::same: {
            std::size_t p = 0;
            std::size_t rem = local;
            while (rem >= M - p) {
                rem -= M - p;
                ++p;
            }
            return {{sec.w1, static_cast<int>(p)}, {sec.w1, static_cast<int>(p + rem)}};
        }
        case Kind::pair:
            return {{sec.w1, static_cast<int>(local / M)}, {sec.w2, static_cast<int>(local % M)}};
    }
    return {};
}

std::size_t FullSpace::cavity_index(int j) const {
    return sectors_.at(static_cast<std::size_t>(find_sector(j, j, std::vector<int>(
                                                                     static_cast<std::size_t>(n_waveguides_), 0))))
        .offset;
}

void FullGenerator::add(std::size_t row, std::size_t col, cdouble coef, int phase) {
    if (coef != 0.0) terms_.push_back({row, col, coef, phase});
}

FullGenerator::FullGenerator(const SystemConfig& cfg, const WaveguideArrayConfig& wcfg, const ModeGrid& grid)
    : space_((cfg.validate(), wcfg.validate(), cfg.n_levels), wcfg.n_waveguides, grid.n_modes) {
    const int N = cfg.n_levels;
    const int W = wcfg.n_waveguides;
    const int M = grid.n_modes;
    const double mu = grid.spacing() / cfg.field_speed;
    const double smu = std::sqrt(mu);

    nu_.resize(static_cast<std::size_t>(M));
    std::vector<double> g(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        nu_[static_cast<std::size_t>(k)] = grid.omega(k) - cfg.delta0;
        g[static_cast<std::size_t>(k)] = cfg.g0 * std::sin(grid.omega(k) * cfg.tau / 2.0);
    }
    atom_detuning_.resize(static_cast<std::size_t>(N - 1));
    for (int j = 1; j < N; ++j) atom_detuning_[static_cast<std::size_t>(j - 1)] = cfg.chain_detuning(j);

    const auto& secs = space_.sectors();
    for (int s = 0; s < static_cast<int>(secs.size()); ++s) {
        const auto& sec = secs[static_cast<std::size_t>(s)];
        for (std::size_t local = 0; local < sec.size; ++local) {
            const std::size_t row = sec.offset + local;
            const std::vector<Photon> ph = space_.photons(s, local);

            // atom emits into the cavity: (j-1, m-1, S) -> (j, m, S)
            if (sec.j >= 1 && sec.m >= 1) {
                const double e = cfg.ladder_factor(sec.m) * cfg.gamma[static_cast<std::size_t>(N - sec.j - 1)];
                const std::size_t col = space_.index(sec.j - 1, sec.m - 1, ph);
                add(row, col, kI * e, atom_phase(sec.j, false));
                add(col, row, kI * e, atom_phase(sec.j, true));
            }

            // cavity emits into waveguide 1: (j, m+1, S - k) -> (j, m, S)
            const int n1 = sec.distribution[0];
            if (n1 >= 1 && sec.m + 1 <= sec.j) {
                for (std::size_t i = 0; i < ph.size(); ++i) {
                    if (ph[i].waveguide != 0 || (i > 0 && ph[i] == ph[i - 1])) continue;
                    const int k = ph[i].mode;
                    std::vector<Photon> rest = ph;
                    rest.erase(rest.begin() + static_cast<long>(i));
                    const std::size_t col = space_.index(sec.j, sec.m + 1, rest);
                    const double coef = smu * std::sqrt(static_cast<double>(n1 * multiplicity(ph, ph[i]))) *
                                        g[static_cast<std::size_t>(k)];
                    add(row, col, kI * coef, emit_phase(k));
                    add(col, row, kI * coef, absorb_phase(k));
                }
            }

            // hopping between neighbouring waveguides, same mode
            for (std::size_t i = 0; i < ph.size(); ++i) {
                if (i > 0 && ph[i] == ph[i - 1]) continue;
                const int w = ph[i].waveguide;
                for (int w2 : {w - 1, w + 1}) {
                    if (w2 < 0 || w2 >= W) continue;
                    const double K = wcfg.couplings[static_cast<std::size_t>(std::min(w, w2))];
                    if (K == 0.0) continue;
                    std::vector<Photon> moved = ph;
                    moved[i].waveguide = w2;
                    const Photon target{w2, ph[i].mode};
                    const double f = std::sqrt(static_cast<double>(multiplicity(ph, ph[i]) *
                                                                   (multiplicity(ph, target) + 1)));
                    add(space_.index(sec.j, sec.m, moved), row, kI * (K * f), 0);
                }
            }

            // on-site propagation constants
            double onsite = 0.0;
            for (const auto& p : ph) onsite += wcfg.propagation[static_cast<std::size_t>(p.waveguide)];
            add(row, row, kI * onsite, 0);
        }
    }

    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(space_.dimension() + 1, 0);
    col_.reserve(terms_.size());
    coef_.reserve(terms_.size());
    phase_.reserve(terms_.size());
    for (const auto& t : terms_) {
        ++row_ptr_[t.row + 1];
        col_.push_back(t.col);
        coef_.push_back(t.coef);
        phase_.push_back(t.phase);
    }
    for (std::size_t r = 0; r < space_.dimension(); ++r) row_ptr_[r + 1] += row_ptr_[r];
    terms_.clear();
    terms_.shrink_to_fit();
}

void FullGenerator::phases(double t, std::vector<cdouble>& table) const {
    const int M = space_.n_modes();
    table.resize(static_cast<std::size_t>(1 + 2 * M + 2 * static_cast<int>(atom_detuning_.size())));
    table[0] = 1.0;
    for (int k = 0; k < M; ++k) {
        const cdouble e = std::exp(-kI * (nu_[static_cast<std::size_t>(k)] * t));
        table[static_cast<std::size_t>(absorb_phase(k))] = e;
        table[static_cast<std::size_t>(emit_phase(k))] = std::conj(e);
    }
    for (std::size_t j = 0; j < atom_detuning_.size(); ++j) {
        const cdouble e = std::exp(-kI * (atom_detuning_[j] * t));
        table[static_cast<std::size_t>(atom_phase(static_cast<int>(j) + 1, false))] = e;
        table[static_cast<std::size_t>(atom_phase(static_cast<int>(j) + 1, true))] = std::conj(e);
    }
}

void FullGenerator::apply(const std::vector<cdouble>& table, const Eigen::VectorXcd& y,
                          Eigen::VectorXcd& out) const {
    const std::size_t n = space_.dimension();
    out.resize(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        cdouble acc = 0.0;
        for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e)
            acc += coef_[e] * table[static_cast<std::size_t>(phase_[e])] * y(static_cast<Eigen::Index>(col_[e]));
        out(static_cast<Eigen::Index>(r)) = acc;
    }
}

Eigen::VectorXcd FullGenerator::apply(double t, const Eigen::VectorXcd& y) const {
    std::vector<cdouble> table;
    phases(t, table);
    Eigen::VectorXcd out;
    apply(table, y, out);
    return out;
}

Eigen::MatrixXcd FullGenerator::dense(double t) const {
    std::vector<cdouble> table;
    phases(t, table);
    const auto n = static_cast<Eigen::Index>(space_.dimension());
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t r = 0; r < space_.dimension(); ++r)
        for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e)
            g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_[e])) +=
                coef_[e] * table[static_cast<std::size_t>(phase_[e])];
    return g;
}

namespace {

void record(const FullSpace& space, double t, const Eigen::VectorXcd& y, bool store, FullTrajectory& out) {
    const int N = space.n_levels();
    const int W = space.n_waveguides();
    out.times.push_back(t);

    Eigen::VectorXcd cav(N);
    for (int j = 0; j < N; ++j) cav(j) = y(static_cast<Eigen::Index>(space.cavity_index(j)));
    out.cavity.push_back(cav);

    Eigen::VectorXd photons = Eigen::VectorXd::Zero(N);
    Eigen::MatrixXd per_wg = Eigen::MatrixXd::Zero(W, N);
    for (const auto& sec : space.sectors()) {
        const double p =
            y.segment(static_cast<Eigen::Index>(sec.offset), static_cast<Eigen::Index>(sec.size)).squaredNorm();
        photons(sec.j - sec.m) += p;
        for (int w = 0; w < W; ++w) per_wg(w, sec.distribution[static_cast<std::size_t>(w)]) += p;
    }
    out.photon_populations.push_back(photons);
    out.waveguide_populations.push_back(per_wg);
    out.norm.push_back(y.squaredNorm());
    if (store) out.states.push_back(y);
}

}  // namespace

FullTrajectory simulate_waveguide_array(const SystemConfig& cfg, const WaveguideArrayConfig& wcfg,
                                        const ModeGrid& grid, double t_end, double h,
                                        const FullSimOptions& opts) {
    cfg.validate();
    wcfg.validate();
    require(t_end > 0.0, "simulate: t_end must be > 0");
    require(h > 0.0, "simulate: h must be > 0");
    require(opts.sample_every >= 1, "simulate: sample_every must be >= 1");
    grid.validate(t_end);
    if (opts.require_delay_resolution && !grid.resolves_delay(cfg.tau))
        throw std::invalid_argument("mode grid half_width " + std::to_string(grid.half_width) +
                                    " is below 6*pi/tau = " + std::to_string(6.0 * pi / cfg.tau));

    const std::size_t need = FullSpace::count(cfg.n_levels, wcfg.n_waveguides, grid.n_modes);
    if (need > opts.budget)
        throw BudgetError("full simulation needs " + std::to_string(need) + " amplitudes, budget is " +
                              std::to_string(opts.budget),
                          need);

    const FullGenerator gen(cfg, wcfg, grid);
    const FullSpace& space = gen.space();

    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.dimension()));
    y(static_cast<Eigen::Index>(space.cavity_index(0))) = 1.0;

    FullTrajectory out;
    out.n_amplitudes = space.dimension();
    record(space, 0.0, y, opts.store_states, out);

    const long n_steps = static_cast<long>(std::ceil(t_end / h - 1e-9));
    std::vector<cdouble> table;
    Eigen::VectorXcd k1, k2, k3, k4, tmp;
    for (long n = 0; n < n_steps; ++n) {
        const double t = n * h;
        gen.phases(t, table);
        gen.apply(table, y, k1);
        gen.phases(t + 0.5 * h, table);
        tmp = y + (0.5 * h) * k1;
        gen.apply(table, tmp, k2);
        tmp = y + (0.5 * h) * k2;
        gen.apply(table, tmp, k3);
        gen.phases(t + h, table);
        tmp = y + h * k3;
        gen.apply(table, tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_divergence(y, t + h);
        if ((n + 1) % opts.sample_every == 0 || n + 1 == n_steps)
            record(space, (n + 1) * h, y, opts.store_states, out);
    }
    out.final_state = y;
    return out;
}

FullTrajectory simulate_single_waveguide(const SystemConfig& cfg, const ModeGrid& grid, double t_end,
                                         double h, const FullSimOptions& opts) {
    WaveguideArrayConfig wcfg;
    wcfg.n_waveguides = 1;
    wcfg.propagation = {0.0};
    return simulate_waveguide_array(cfg, wcfg, grid, t_end, h, opts);
}

KernelReport delay_kernel_check(const SystemConfig& cfg, const ModeGrid& grid, double t_end,
                                int steps_per_delay) {
    cfg.validate();
    require(cfg.n_levels == 2, "delay_kernel_check requires n_levels == 2 (single excitation)");
    require(steps_per_delay >= 16, "delay_kernel_check: steps_per_delay must be >= 16");
    require(t_end > 2.0 * cfg.tau, "delay_kernel_check: t_end must exceed 2*tau");

    const double h = cfg.tau / steps_per_delay;
    FullSimOptions opts;
    const FullTrajectory traj = simulate_single_waveguide(cfg, grid, t_end, h, opts);

    const int M = grid.n_modes;
    const double mu = grid.spacing() / cfg.field_speed;
    const double kappa = cfg.kappa();
    const cdouble feedback = std::exp(kI * cfg.feedback_phase());

    std::vector<cdouble> c(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) c[i] = traj.cavity[i](1);

    // exponential quadrature of ∫ e^{-iν(t-u)} c(u) du with c linear on each step
    std::vector<cdouble> e(static_cast<std::size_t>(M)), w0(static_cast<std::size_t>(M)),
        w1(static_cast<std::size_t>(M)), I(static_cast<std::size_t>(M), 0.0);
    std::vector<double> g2(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        const auto K = static_cast<std::size_t>(k);
        const double gk = cfg.g0 * std::sin(grid.omega(k) * cfg.tau / 2.0);
        g2[K] = gk * gk;
        const cdouble a = -kI * (grid.detuning(k) * h);
        cdouble phi1, phi2;
        if (std::abs(a) < 1e-4) {
            phi1 = 1.0 + a / 2.0 + a * a / 6.0;
            phi2 = 0.5 + a / 6.0 + a * a / 24.0;
        } else {
            phi1 = (std::exp(a) - 1.0) / a;
            phi2 = (std::exp(a) - 1.0 - a) / (a * a);
        }
        e[K] = std::exp(a);
        w0[K] = h * (phi1 - phi2);
        w1[K] = h * phi2;
    }

    KernelReport rep;
    rep.kappa = kappa;
    rep.steps_per_delay = steps_per_delay;
    rep.grid_resolves_delay = grid.resolves_delay(cfg.tau);
    const auto m = static_cast<std::size_t>(steps_per_delay);
    double max_diff = 0.0;
    double max_c = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        if (n > 0)
            for (std::size_t k = 0; k < static_cast<std::size_t>(M); ++k)
                I[k] = e[k] * I[k] + w0[k] * c[n - 1] + w1[k] * c[n];
        cdouble kern = 0.0;
        for (std::size_t k = 0; k < static_cast<std::size_t>(M); ++k) kern += g2[k] * I[k];
        kern *= -mu;
        const cdouble delayed = n >= m ? c[n - m] : cdouble(0.0);
        const cdouble ref = -kappa * (c[n] - feedback * delayed);
        rep.times.push_back(traj.times[n]);
        rep.kernel.push_back(kern);
        rep.reference.push_back(ref);
        if (n >= 2 * m) {
            max_diff = std::max(max_diff, std::abs(kern - ref));
            max_c = std::max(max_c, std::abs(c[n]));
            rep.max_kernel = std::max(rep.max_kernel, std::abs(kern));
            rep.max_reference = std::max(rep.max_reference, std::abs(ref));
        }
    }
    rep.max_deviation = (kappa > 0.0 && max_c > 0.0) ? max_diff / (kappa * max_c) : max_diff;
    return rep;
}

}  // namespace qfs
