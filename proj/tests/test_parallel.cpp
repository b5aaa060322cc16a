// test_parallel.cpp: waveguide-array propagation, poles and signal observables.

#include "qfs/dde.hpp"
#include "qfs/fullsim.hpp"
#include "qfs/parallel.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace qfs;

namespace {

Eigen::VectorXcd unit(int n, int k) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    v(k) = 1.0;
    return v;
}

}  // namespace

TEST(Propagate, ThreeGuideArrayIsPeriodic) {
    const WaveguideArrayConfig w{3, {0.5, 0.5}, {0.0, 0.0, 0.0}};
    const Eigen::VectorXcd c0 = unit(3, 0);
    const Eigen::VectorXcd c = propagate_single_excitation(w, c0, 2.0 * pi / std::sqrt(0.5));
    EXPECT_NEAR(std::norm(c(0)), 1.0, 1e-12);
    EXPECT_LT((c - c0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Propagate, IdentityAtTimeZero) {
    const WaveguideArrayConfig w{4, {0.3, 0.7, 0.2}, {0.1, 0.0, -0.4, 0.2}};
    Eigen::VectorXcd c0(4);
    c0 << 0.5, cdouble(0.1, 0.2), -0.3, cdouble(0.0, 0.7);
    EXPECT_LT((propagate_single_excitation(w, c0, 0.0) - c0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Propagate, TwoGuideSineSquared) {
    const double k = 0.37;
    const WaveguideArrayConfig w{2, {k}, {0.0, 0.0}};
    for (double t : {0.3, 1.7, 5.0, 12.9}) {
        const Eigen::VectorXcd c = propagate_single_excitation(w, unit(2, 0), t);
        EXPECT_NEAR(std::norm(c(1)), std::pow(std::sin(k * t), 2), 1e-13);
    }
}

TEST(Propagate, Unitarity) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0), tt(0.0, 100.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 8;
        WaveguideArrayConfig w{n, {}, {}};
        for (int i = 0; i < n - 1; ++i) w.couplings.push_back(u(rng));
        for (int i = 0; i < n; ++i) w.propagation.push_back(u(rng));
        Eigen::VectorXcd c0(n);
        for (int i = 0; i < n; ++i) c0(i) = cdouble(u(rng), u(rng));
        EXPECT_NEAR(propagate_single_excitation(w, c0, tt(rng)).norm(), c0.norm(), 1e-12);
    }
}

TEST(Propagate, AgreesWithRungeKutta) {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 1; n <= 8; ++n) {
        WaveguideArrayConfig w{n, {}, {}};
        for (int i = 0; i < n - 1; ++i) w.couplings.push_back(u(rng));
        for (int i = 0; i < n; ++i) w.propagation.push_back(u(rng));
        const Eigen::MatrixXcd g = kI * build_gw_matrix(w).cast<cdouble>();
        const Eigen::VectorXcd c0 = unit(n, 0);
        const auto tr = integrate_ode<cdouble>([&](double) { return g; }, c0, 10.0, 0.005);
        EXPECT_LT((tr.states.back() - propagate_single_excitation(w, c0, 10.0)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Propagate, RejectsZeroOrMismatchedState) {
    const WaveguideArrayConfig w{2, {0.5}, {0.0, 0.0}};
    EXPECT_THROW(propagate_single_excitation(w, Eigen::VectorXcd::Zero(2), 1.0), std::invalid_argument);
    EXPECT_THROW(propagate_single_excitation(w, unit(3, 0), 1.0), std::invalid_argument);
}

TEST(Poles, ThreeGuideArray) {
    const auto p = characteristic_poles({3, {0.5, 0.5}, {0.0, 0.0, 0.0}});
    ASSERT_EQ(p.size(), 3u);
    EXPECT_NEAR(std::abs(p[0] - cdouble(0.0, -std::sqrt(0.5))), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(p[1]), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(p[2] - cdouble(0.0, std::sqrt(0.5))), 0.0, 1e-14);
    for (const auto& s : p) EXPECT_EQ(s.real(), 0.0);
}

TEST(Poles, SingleGuide) {
    const auto p = characteristic_poles({1, {}, {0.3}});
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0], cdouble(0.0, 0.3));
}

TEST(Poles, SymmetricAboutCommonPropagationConstant) {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 7;
        const double beta = u(rng);
        WaveguideArrayConfig w{n, {}, std::vector<double>(static_cast<std::size_t>(n), beta)};
        for (int i = 0; i < n - 1; ++i) w.couplings.push_back(u(rng));
        auto p = characteristic_poles(w);
        for (std::size_t i = 0; i < p.size(); ++i)
            EXPECT_NEAR(p[i].imag() - beta, -(p[p.size() - 1 - i].imag() - beta), 1e-12);
    }
}

TEST(NoPhotonCriterion, Examples) {
    SystemConfig c = make_config(3, {0.3, 0.3}, 0.2, 50.0, 2.0 * pi / 50.0);
    EXPECT_TRUE(no_photon_criterion(c));
    c.tau = 3.0 * pi / 50.0;
    EXPECT_FALSE(no_photon_criterion(c));
    c.tau = 2.0 * pi / 50.0;
    c.delta = {0.1, 0.0};
    EXPECT_FALSE(no_photon_criterion(c));
    c.delta = {0.0, 0.0};
    c.tau = (2.0 * pi - 1e-7) / 50.0;
    EXPECT_FALSE(no_photon_criterion(c));
    c.tau = 4.0 * pi / 50.0;
    EXPECT_TRUE(no_photon_criterion(c));
}

TEST(NoPhotonCriterion, WaveguideStaysNearlyEmptyOnResonantPreset) {
    const SystemConfig c = make_config(3, {0.3, 0.3}, 0.2, 50.0, 2.0 * pi / 50.0, LadderScaling::unit);
    ASSERT_TRUE(no_photon_criterion(c));
    const double t_end = 100.0 * c.tau;
    const ModeGrid g = ModeGrid::for_horizon(c.delta0, 4.0, t_end);
    const FullTrajectory tr = simulate_single_waveguide(c, g, t_end, c.tau / 16.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k)
        worst = std::max({worst, tr.photon_populations[k](1), tr.photon_populations[k](2)});
    EXPECT_LT(worst, 1e-3);
}

TEST(Signals, DominantFrequencyOfSinusoid) {
    std::vector<double> t, x;
    for (int i = 0; i < 4000; ++i) {
        t.push_back(0.05 * i);
        x.push_back(0.3 + std::cos(1.234 * t.back()) + 0.2 * std::sin(3.1 * t.back()));
    }
    EXPECT_NEAR(dominant_angular_frequency(t, x), 1.234, 0.01);
    EXPECT_NEAR(dominant_angular_frequency(t, x, 5.0, 32), 1.234, 0.005);
    EXPECT_THROW(dominant_angular_frequency({0.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Signals, TimeAverage) {
    std::vector<double> t, x;
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(0.01 * i);
        x.push_back(2.0 * t.back());
    }
    EXPECT_NEAR(time_average(t, x), 10.0, 1e-12);
    EXPECT_NEAR(time_average(t, x, 5.0), 15.0, 1e-12);
    EXPECT_THROW(time_average(t, x, 20.0), std::invalid_argument);
}
