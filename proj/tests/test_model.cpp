// test_model.cpp: configuration, basis and delay-system matrix tests.

#include "qfs/dde.hpp"
#include "qfs/model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qfs;

namespace {

SystemConfig random_config(std::mt19937& rng, int n, bool detuned) {
    std::uniform_real_distribution<double> g(0.1, 1.0), d(-1.0, 1.0), ph(0.1, 10.0);
    SystemConfig c;
    c.n_levels = n;
    for (int j = 0; j < n - 1; ++j) {
        c.gamma.push_back(g(rng));
        c.delta.push_back(detuned ? d(rng) : 0.0);
    }
    c.g0 = 0.3 * g(rng);
    c.delta0 = 50.0;
    c.tau = ph(rng) / c.delta0;
    c.ladder = (rng() % 2) ? LadderScaling::bosonic : LadderScaling::unit;
    return c;
}

}  // namespace

TEST(Config, KappaIsDerivedFromCouplingAndSpeed) {
    SystemConfig c = make_config(2, {1.0}, 0.2, 50.0, 0.1);
    EXPECT_NEAR(c.kappa(), pi * 0.04 / 2.0, 1e-15);
    c.field_speed = 2.0;
    EXPECT_NEAR(c.kappa(), pi * 0.04 / 4.0, 1e-15);
    EXPECT_NEAR(g0_for_kappa(c.kappa(), 2.0), 0.2, 1e-14);
}

TEST(Config, RejectsInvalidParameters) {
    SystemConfig c = make_config(3, {0.3, 0.3}, 0.2, 50.0, 0.1);
    c.gamma.pop_back();
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = make_config(3, {0.3, 0.3}, 0.2, 50.0, 0.1);
    c.tau = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.tau = 0.1;
    c.delta0 = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.delta0 = 50.0;
    c.g0 = -0.1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(ladder_scaling_from_string("harmonic"), std::invalid_argument);
    WaveguideArrayConfig w{3, {0.5}, {0, 0, 0}};
    EXPECT_THROW(w.validate(), std::invalid_argument);
}

TEST(DelaySystem, TwoLevelMatricesAtConstructivePhase) {
    SystemConfig c = make_config(2, {1.0}, g0_for_kappa(0.1), 50.0, 2.0 * pi / 50.0);
    const DelaySystem s = build_cavity_delay_system(c);
    Eigen::MatrixXcd a(2, 2), b(2, 2);
    a << 0.0, kI, kI, -0.1;
    b << 0.0, 0.0, 0.0, 0.1;
    EXPECT_LT((s.a(0.7) - a).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((s.b - b).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DelaySystem, ThreeLevelSecondRowCarriesSqrtTwo) {
    SystemConfig c = make_config(3, {0.3, 0.5}, 0.2, 50.0, 0.1);
    const Eigen::MatrixXcd a = build_cavity_delay_system(c).a(0.0);
    EXPECT_NEAR(std::abs(a(2, 1) - kI * std::sqrt(2.0) * 0.3), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(1, 2) - kI * std::sqrt(2.0) * 0.3), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(1, 0) - kI * 0.5), 0.0, 1e-15);
    c.ladder = LadderScaling::unit;
    EXPECT_NEAR(std::abs(build_cavity_delay_system(c).a(0.0)(2, 1) - kI * 0.3), 0.0, 1e-15);
}

TEST(DelaySystem, StructureOfAAndB) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const SystemConfig c = random_config(rng, 2 + trial % 4, true);
        const DelaySystem s = build_cavity_delay_system(c);
        const double k = c.kappa();
        const cdouble e = std::exp(kI * c.feedback_phase());
        const double t = 0.37 * trial;
        const Eigen::MatrixXcd a = s.a(t);
        for (int i = 0; i < c.n_levels; ++i) {
            for (int j = 0; j < c.n_levels; ++j) {
                const cdouble bij = s.b(i, j);
                if (i != j) {
                    EXPECT_EQ(bij, cdouble(0.0));
                    if (std::abs(i - j) > 1) EXPECT_EQ(a(i, j), cdouble(0.0));
                }
            }
            EXPECT_NEAR(std::abs(s.b(i, i) - (i == 0 ? cdouble(0.0) : k * e)), 0.0, 1e-15);
            EXPECT_NEAR(std::abs(a(i, i) - (i == 0 ? cdouble(0.0) : cdouble(-k))), 0.0, 1e-15);
        }
        for (int j = 1; j < c.n_levels; ++j)
            EXPECT_NEAR(std::abs(a(j, j - 1)), c.chain_coupling(j), 1e-14);
    }
}

TEST(DelaySystem, TwoLevelDeterminantIsGammaSquared) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    SystemConfig c = make_config(2, {0.7}, 0.3, 50.0, 0.11);
    c.delta = {1.3};
    const DelaySystem s = build_cavity_delay_system(c);
    for (int i = 0; i < 100; ++i) {
        const cdouble d = (s.a(u(rng)) + s.b).determinant();
        EXPECT_NEAR(std::abs(d - 0.49), 0.0, 1e-12);
    }
}

TEST(DelaySystem, DeterminantOfAPlusBNonzero) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    for (int n = 2; n <= 5; ++n) {
        const SystemConfig c = random_config(rng, n, true);
        const DelaySystem s = build_cavity_delay_system(c);
        for (int i = 0; i < 1000; ++i) EXPECT_GT(std::abs((s.a(u(rng)) + s.b).determinant()), 1e-9);
    }
}

TEST(RealEmbedding, ResonantBlocksAreQuarterTurns) {
    SystemConfig c = make_config(3, {0.3, 0.4}, 0.2, 50.0, 0.1);
    const RealDelaySystem r = build_real_embedding(build_cavity_delay_system(c));
    Eigen::Matrix2d j;
    j << 0, -1, 1, 0;
    EXPECT_LT((rotation_block(0.0, 3.3) - j).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(r.time_invariant());
    EXPECT_LT((r.a0.block(2, 0, 2, 2) - c.chain_coupling(1) * j).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RealEmbedding, DelayRotationIsIdentityAtTwoPiMultiples) {
    for (int n = 1; n <= 4; ++n)
        EXPECT_LT((delay_rotation(2.0 * pi * n) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RealEmbedding, BTransposeBIsScaledIdentityOffGround) {
    std::mt19937 rng(5);
    for (int n = 2; n <= 5; ++n) {
        const SystemConfig c = random_config(rng, n, true);
        const RealDelaySystem r = build_real_embedding(build_cavity_delay_system(c));
        Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(2 * n, 2 * n) * c.kappa() * c.kappa();
        expect(0, 0) = expect(1, 1) = 0.0;
        EXPECT_LT((r.b.transpose() * r.b - expect).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(RealEmbedding, ReproducesComplexTrajectory) {
    std::mt19937 rng(21);
    for (int n = 2; n <= 4; ++n) {
        const SystemConfig c = random_config(rng, n, true);
        const DelaySystem s = build_cavity_delay_system(c);
        const RealDelaySystem r = build_real_embedding(s);
        const auto tc = integrate_delay(s, 20.0 * c.tau, 32);
        const auto tr = integrate_delay(r, 20.0 * c.tau, 32);
        ASSERT_EQ(tc.size(), tr.size());
        double err = 0.0;
        for (std::size_t k = 0; k < tc.size(); ++k)
            err = std::max(err, (unembed(tr.states[k]) - tc.states[k]).cwiseAbs().maxCoeff());
        EXPECT_LT(err, 1e-12) << "N=" << n;
    }
}

TEST(Upsilon, VanishesWithoutDetuning) {
    SystemConfig c = make_config(4, {0.3, 0.4, 0.5}, 0.2, 50.0, 0.1);
    for (double t : {0.0, 1.0, 17.5}) {
        EXPECT_EQ(upsilon_norm(c, t), 0.0);
        EXPECT_EQ(upsilon_matrix(c, t).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Upsilon, TwoLevelWorstCaseEqualsTwoGamma) {
    SystemConfig c = make_config(2, {1.0}, 0.2, 50.0, 0.1);
    c.delta = {1.0};
    EXPECT_NEAR(upsilon_norm(c, pi), 2.0, 1e-14);
    EXPECT_NEAR(upsilon_norm_bruteforce(c, pi), 2.0, 1e-12);
}

TEST(Upsilon, ClosedFormMatchesSingularValueUpToThreeLevels) {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 200; ++i) {
        const SystemConfig c = random_config(rng, 2 + i % 2, true);
        const double t = u(rng);
        const double bf = upsilon_norm_bruteforce(c, t);
        EXPECT_LT(std::abs(upsilon_norm(c, t) - bf), 1e-10 * std::max(bf, 1e-300));
    }
}

TEST(Upsilon, GramDiagonalBlocksMatchTransitionSums) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 50; ++i) {
        const SystemConfig c = random_config(rng, 2 + i % 4, true);
        const double t = u(rng);
        const Eigen::MatrixXd g = upsilon_matrix(c, t).transpose() * upsilon_matrix(c, t);
        for (int j = 0; j < c.n_levels; ++j) {
            double expect = 0.0;
            for (int r : {j, j + 1})
                if (r >= 1 && r < c.n_levels) {
                    const double e = c.chain_coupling(r);
                    expect += 2.0 * e * e * (1.0 - std::cos(c.chain_detuning(r) * t));
                }
            const Eigen::Matrix2d blk = g.block(2 * j, 2 * j, 2, 2);
            EXPECT_LT((blk - expect * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(Upsilon, SupremumBoundDominatesAllTimes) {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        const SystemConfig c = random_config(rng, 2 + i % 4, true);
        const double bound = upsilon_sup_bound(c);
        for (int k = 0; k < 20; ++k) EXPECT_LE(upsilon_norm_bruteforce(c, u(rng)), bound * (1.0 + 1e-12));
    }
}

TEST(WaveguideArray, ThreeGuideMatrixAndSpectrum) {
    const WaveguideArrayConfig w{3, {0.5, 0.5}, {0.0, 0.0, 0.0}};
    Eigen::Matrix3d expect;
    expect << 0, 0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0;
    const Eigen::MatrixXd g = build_gw_matrix(w);
    EXPECT_EQ((g - expect).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    EXPECT_NEAR(es.eigenvalues()(0), -std::sqrt(0.5), 1e-14);
    EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-14);
    EXPECT_NEAR(es.eigenvalues()(2), std::sqrt(0.5), 1e-14);
}

TEST(WaveguideArray, SingleGuideIsPropagationConstant) {
    const Eigen::MatrixXd g = build_gw_matrix({1, {}, {0.25}});
    ASSERT_EQ(g.rows(), 1);
    EXPECT_EQ(g(0, 0), 0.25);
}

TEST(Basis, SectorCountsAreWeakCompositions) {
    for (int w = 1; w <= 4; ++w)
        for (int p = 0; p <= 4; ++p) {
            const auto d = photon_distributions(p, w);
            EXPECT_EQ(d.size(), weak_composition_count(p, w));
            for (const auto& x : d) {
                int s = 0;
                for (int v : x) s += v;
                EXPECT_EQ(s, p);
            }
        }
    EXPECT_EQ(weak_composition_count(2, 3), 6u);
}

TEST(Basis, IndexInvariants) {
    BasisIndex ok{2, 0, {{1, 3}}};
    EXPECT_NO_THROW(ok.validate(3));
    EXPECT_EQ(ok.waveguide_photons(), 2);
    BasisIndex unsorted{2, 0, {{3, 1}}};
    EXPECT_THROW(unsorted.validate(3), std::invalid_argument);
    BasisIndex wrong_count{2, 1, {{1, 3}}};
    EXPECT_THROW(wrong_count.validate(3), std::invalid_argument);
    BasisIndex too_many{1, 2, {{}}};
    EXPECT_THROW(too_many.validate(3), std::invalid_argument);
}
