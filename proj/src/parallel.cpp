// parallel.cpp: waveguide-array propagator, poles and signal observables.

#include "qfs/parallel.hpp"

#include "qfs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qfs {

Eigen::VectorXcd propagate_single_excitation(const WaveguideArrayConfig& wcfg, const Eigen::VectorXcd& c0,
                                             double t) {
    const Eigen::MatrixXd g = build_gw_matrix(wcfg);
    if (c0.size() != g.rows()) throw std::invalid_argument("initial amplitudes must have n_waveguides entries");
    if (!(c0.norm() > 0.0)) throw std::invalid_argument("initial amplitudes must be nonzero");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const Eigen::MatrixXcd v = es.eigenvectors().cast<cdouble>();
    Eigen::VectorXcd phase(g.rows());
    for (Eigen::Index i = 0; i < g.rows(); ++i) phase(i) = std::exp(kI * (es.eigenvalues()(i) * t));
    return v * (phase.asDiagonal() * (v.adjoint() * c0));
}

std::vector<cdouble> characteristic_poles(const WaveguideArrayConfig& wcfg) {
    const Eigen::MatrixXd g = build_gw_matrix(wcfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    std::vector<cdouble> poles;
    for (Eigen::Index i = 0; i < g.rows(); ++i) poles.emplace_back(0.0, es.eigenvalues()(i));
    return poles;
}

bool no_photon_criterion(const SystemConfig& cfg) {
    cfg.validate();
    if (phase_distance_to_2npi(cfg.feedback_phase()) >= 1e-9) return false;
    return std::all_of(cfg.delta.begin(), cfg.delta.end(), [](double d) { return std::abs(d) < 1e-12; });
}

double dominant_angular_frequency(const std::vector<double>& t, const std::vector<double>& x, double omega_max,
                                  int oversample) {
    if (t.size() != x.size() || t.size() < 4) throw std::invalid_argument("need at least 4 matching samples");
    if (oversample < 1) throw std::invalid_argument("oversample must be >= 1");
    const std::size_t n = t.size();
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    const double span = t.back() - t.front();
    if (!(dt > 0.0)) throw std::invalid_argument("samples must be increasing");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n - 1));
        y[i] = (x[i] - mean) * w;
    }

    const double nyquist = pi / dt;
    const double top = omega_max > 0.0 ? std::min(omega_max, nyquist) : nyquist;
    const double step = 2.0 * pi / span / oversample;
    double best_w = 0.0;
    double best_p = -1.0;
    for (double w = step; w <= top; w += step) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ph = w * (t[i] - t.front());
            re += y[i] * std::cos(ph);
            im += y[i] * std::sin(ph);
        }
        const double p = re * re + im * im;
        if (p > best_p) {
            best_p = p;
            best_w = w;
        }
    }
    return best_w;
}

double time_average(const std::vector<double>& t, const std::vector<double>& x, double t_from) {
    if (t.size() != x.size()) throw std::invalid_argument("time and value arrays differ in length");
    double area = 0.0, len = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i - 1] < t_from) continue;
        const double dt = t[i] - t[i - 1];
        area += 0.5 * (x[i] + x[i - 1]) * dt;
        len += dt;
    }
    if (!(len > 0.0)) throw std::invalid_argument("time_average: empty window");
    return area / len;
}

}  // namespace qfs
