// parallel.hpp: single-excitation propagation in a coupled waveguide array and related observables.

#pragma once

#include "qfs/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace qfs {

// exp(iG_W t)·c0 via the eigen-decomposition of G_W.
Eigen::VectorXcd propagate_single_excitation(const WaveguideArrayConfig& wcfg, const Eigen::VectorXcd& c0, double t);

// i·eig(G_W), ascending in imaginary part.
std::vector<cdouble> characteristic_poles(const WaveguideArrayConfig& wcfg);

// Δ0τ within 1e-9 of a multiple of 2π and every |δ_j| < 1e-12.
bool no_photon_criterion(const SystemConfig& cfg);

// Angular frequency of the largest discrete Fourier peak of a uniformly sampled real signal.
// The mean is removed and a Hann window applied; the peak is located on a grid of `oversample`×
// the natural resolution over (0, ω_max] (ω_max ≤ 0 means Nyquist).
double dominant_angular_frequency(const std::vector<double>& t, const std::vector<double>& x, double omega_max = 0.0,
                                  int oversample = 16);

// Trapezoidal time average of x over the samples with t >= t_from.
double time_average(const std::vector<double>& t, const std::vector<double>& x, double t_from = 0.0);

}  // namespace qfs
