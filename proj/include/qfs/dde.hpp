// dde.hpp: fixed-step RK4 integrators for delay and delay-free linear systems.

#pragma once

#include "qfs/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace qfs {

// Raised when an amplitude exceeds the divergence guard.
struct DivergenceError : std::runtime_error {
    double time;
    DivergenceError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
};

inline constexpr double divergence_threshold = 1e6;

template <class Scalar>
struct Trajectory {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    std::vector<double> times;
    std::vector<Vector> states;

    std::size_t size() const { return times.size(); }

    // |x_i|² per amplitude; real states are read as interleaved (re, im) pairs.
    Eigen::VectorXd populations(std::size_t k) const {
        const Vector& x = states.at(k);
        if constexpr (std::is_same_v<Scalar, double>) {
            Eigen::VectorXd p(x.size() / 2);
            for (Eigen::Index i = 0; i < p.size(); ++i)
                p(i) = x(2 * i) * x(2 * i) + x(2 * i + 1) * x(2 * i + 1);
            return p;
        } else {
            return x.cwiseAbs2();
        }
    }

    double norm(std::size_t k) const { return states.at(k).norm(); }
};

// Samples on the delay grid t = t0 - τ, …, t, with left/right derivatives for Hermite interpolation.
template <class Vector>
class DelayHistory {
public:
    DelayHistory(double step, int steps_per_delay)
        : h_(step), m_(steps_per_delay), cap_(static_cast<std::size_t>(steps_per_delay) + 2) {
        x_.resize(cap_);
        dl_.resize(cap_);
        dr_.resize(cap_);
    }

    double step() const { return h_; }
    int steps_per_delay() const { return m_; }

    // Store sample k (k >= -m); derivative slots initialised to `d`.
    void push(long k, const Vector& x, const Vector& d) {
        const std::size_t s = slot(k);
        x_[s] = x;
        dl_[s] = d;
        dr_[s] = d;
        newest_ = k;
    }
    void set_right_derivative(long k, const Vector& d) { dr_[slot(k)] = d; }
    void set_derivative(long k, const Vector& d) {
        dl_[slot(k)] = d;
        dr_[slot(k)] = d;
    }

    const Vector& value(long k) const { return x_[checked(k)]; }

    // Cubic Hermite value halfway between samples k and k+1.
    Vector midpoint(long k) const {
        const std::size_t a = checked(k);
        const std::size_t b = checked(k + 1);
        return 0.5 * (x_[a] + x_[b]) + (h_ / 8.0) * (dr_[a] - dl_[b]);
    }

private:
    std::size_t slot(long k) const {
        const long c = static_cast<long>(cap_);
        return static_cast<std::size_t>(((k % c) + c) % c);
    }
    std::size_t checked(long k) const {
        if (k > newest_ || k < newest_ - static_cast<long>(cap_) + 1)
            throw std::out_of_range("DelayHistory: sample " + std::to_string(k) + " not retained");
        return slot(k);
    }

    double h_;
    int m_;
    std::size_t cap_;
    long newest_ = -1;
    std::vector<Vector> x_, dl_, dr_;
};

template <class Vector>
void check_divergence(const Vector& x, double t) {
    const double mx = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    if (!(mx <= divergence_threshold))
        throw DivergenceError("state magnitude exceeded " + std::to_string(divergence_threshold) +
                                  " at t=" + std::to_string(t),
                              t);
}

// ẋ = A(t)x + B x(t-τ) with h = τ/m; delayed stage values from the grid or a one-step Hermite midpoint.
template <class Scalar>
Trajectory<Scalar> integrate_delay(
    const LinearDelaySystem<Scalar>& sys,
    std::type_identity_t<std::function<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(double)>> history, double t_end,
    int steps_per_delay, int sample_every = 1) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    if (!(t_end > 0.0)) throw std::invalid_argument("integrate_delay: t_end must be > 0");
    if (steps_per_delay < 16) throw std::invalid_argument("integrate_delay: steps_per_delay must be >= 16");
    if (sample_every < 1) throw std::invalid_argument("integrate_delay: sample_every must be >= 1");
    if (!history) history = sys.history;
    if (!history) throw std::invalid_argument("integrate_delay: no initial history");

    const int m = steps_per_delay;
    const double h = sys.tau / m;
    const long n_steps = static_cast<long>(std::ceil(t_end / h - 1e-9));
    const bool constant = sys.time_invariant();
    const Matrix& b = sys.b;

    auto a_at = [&](double t) -> Matrix { return constant ? sys.a0 : sys.a_of_t(t); };

    DelayHistory<Vector> hist(h, m);
    const double eps = 1e-6 * h;
    for (long k = -m; k <= 0; ++k) {
        const double t = k * h;
        Vector d = (history(t + eps) - history(t - eps)) / (2.0 * eps);
        hist.push(k, history(t), d);
    }

    Trajectory<Scalar> traj;
    Vector x = hist.value(0);
    traj.times.push_back(0.0);
    traj.states.push_back(x);

    Matrix a_n = a_at(0.0);
    for (long n = 0; n < n_steps; ++n) {
        const double t = n * h;
        const Matrix a_mid = a_at(t + 0.5 * h);
        const Matrix a_next = a_at(t + h);

        const Vector& d0 = hist.value(n - m);
        const Vector dmid = hist.midpoint(n - m);
        const Vector& d1 = hist.value(n - m + 1);

        const Vector k1 = a_n * x + b * d0;
        if (n == 0)
            hist.set_right_derivative(0, k1);
        else
            hist.set_derivative(n, k1);
        const Vector k2 = a_mid * (x + 0.5 * h * k1) + b * dmid;
        const Vector k3 = a_mid * (x + 0.5 * h * k2) + b * dmid;
        const Vector k4 = a_next * (x + h * k3) + b * d1;
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_divergence(x, t + h);

        hist.push(n + 1, x, k4);
        if ((n + 1) % sample_every == 0 || n + 1 == n_steps) {
            traj.times.push_back((n + 1) * h);
            traj.states.push_back(x);
        }
        a_n = a_next;
    }
    return traj;
}

template <class Scalar>
Trajectory<Scalar> integrate_delay(const LinearDelaySystem<Scalar>& sys, double t_end, int steps_per_delay,
                                   int sample_every = 1) {
    return integrate_delay<Scalar>(sys, {}, t_end, steps_per_delay, sample_every);
}

// One classical RK4 step for x' = f(t, x).
template <class Vector, class Rhs>
void rk4_step(Rhs&& f, double t, double h, Vector& x) {
    const Vector k1 = f(t, x);
    const Vector k2 = f(t + 0.5 * h, Vector(x + 0.5 * h * k1));
    const Vector k3 = f(t + 0.5 * h, Vector(x + 0.5 * h * k2));
    const Vector k4 = f(t + h, Vector(x + h * k3));
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// ẋ = G(t)x with fixed-step RK4.
template <class Scalar>
Trajectory<Scalar> integrate_ode(
    const std::type_identity_t<std::function<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(double)>>& generator,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0, double t_end, double h, int sample_every = 1) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (!(h > 0.0)) throw std::invalid_argument("integrate_ode: h must be > 0");
    if (!(t_end >= 0.0)) throw std::invalid_argument("integrate_ode: t_end must be >= 0");
    if (sample_every < 1) throw std::invalid_argument("integrate_ode: sample_every must be >= 1");

    const long n_steps = static_cast<long>(std::ceil(t_end / h - 1e-9));
    Trajectory<Scalar> traj;
    Vector x = x0;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    auto f = [&](double t, const Vector& y) -> Vector { return generator(t) * y; };
    for (long n = 0; n < n_steps; ++n) {
        rk4_step(f, n * h, h, x);
        check_divergence(x, (n + 1) * h);
        if ((n + 1) % sample_every == 0 || n + 1 == n_steps) {
            traj.times.push_back((n + 1) * h);
            traj.states.push_back(x);
        }
    }
    return traj;
}

}  // namespace qfs
