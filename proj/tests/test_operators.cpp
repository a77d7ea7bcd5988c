#include "magnetodisk/bifurcation.hpp"
#include "magnetodisk/eigen.hpp"
#include "magnetodisk/operators.hpp"
#include "magnetodisk/solver.hpp"
#include "magnetodisk/verification.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace magnetodisk;

TEST(Profile, EnforcesTraceAndFiniteness)
{
    const auto g = build_grid(8);
    std::vector<double> v(g->size(), 0.1);
    EXPECT_THROW(Profile(g, v), std::invalid_argument);
    v[0] = 0.0;
    EXPECT_NO_THROW(Profile(g, v));
    v[3] = std::nan("");
    EXPECT_THROW(Profile(g, v), std::invalid_argument);
    v[3] = INFINITY;
    EXPECT_THROW(Profile(g, v), std::invalid_argument);
    EXPECT_THROW(Profile(g, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST(ModelParams, TieBetweenMuAndLambda)
{
    EXPECT_DOUBLE_EQ(*ModelParams::from_mu(2.0).lambda(), 2.0);
    EXPECT_DOUBLE_EQ(ModelParams::from_lambda(3.0).mu(), 4.5);
    EXPECT_NO_THROW(ModelParams::from_mu_lambda(2.0, 2.0));
    EXPECT_THROW(ModelParams::from_mu_lambda(2.0, 2.1), std::invalid_argument);
    EXPECT_THROW(ModelParams::from_mu(INFINITY), std::invalid_argument);
    EXPECT_FALSE(ModelParams::from_mu(-1.0).lambda().has_value());
    auto p = ModelParams::from_mu(1.0);
    EXPECT_THROW(p.set_residual_tol(0.0), std::invalid_argument);
    EXPECT_THROW(p.set_energy_rel_tol(-1.0), std::invalid_argument);
    EXPECT_THROW(p.set_max_iterations(0), std::invalid_argument);
    p.set_residual_tol(1e-6);
    EXPECT_EQ(p.with_mu(3.0).residual_tol(), 1e-6);
}

TEST(Energy, ZeroAtTrivialProfile)
{
    const auto g = build_grid(64);
    for (double mu : {0.0, 1.0, 7.5, -2.0}) {
        EXPECT_EQ(energy(Profile::zero(g), ModelParams::from_mu(mu)), 0.0);
    }
}

TEST(Energy, MatchesQuadratureOracle)
{
    const double mu = 1.0;
    auto integrand = [&](double r) {
        const double h = kHalfPi * r;
        const double s = r == 0.0 ? kHalfPi : std::sin(h) / r;
        const double s2 = std::sin(2.0 * h);
        return kPi * (kHalfPi * kHalfPi + s * s - 0.5 * mu * s2 * s2) * r;
    };
    const double ref = oracle::simpson(integrand, 0.0, 1.0);
    for (double grading : {1.0, 2.0}) {
        const auto g = build_grid(1024, grading);
        const Profile h = Profile::sample(g, [](double r) { return kHalfPi * r; });
        EXPECT_NEAR(energy(h, ModelParams::from_mu(mu)), ref, 1e-6) << "grading " << grading;
    }
}

TEST(Energy, LowerBound)
{
    const auto g = build_grid(256);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mu_dist(0.0, 4.0);
    std::uniform_real_distribution<double> val(-kPi, kPi);
    for (int i = 0; i < 50; ++i) {
        const double mu = mu_dist(rng);
        const Profile smooth = random_profile(g, rng, kPi, true);
        EXPECT_GE(energy(smooth, ModelParams::from_mu(mu)), -kPi * mu / 4.0 - 1e-6);
        const Profile rough = Profile::sample(g, [&](double) { return val(rng); });
        EXPECT_GE(energy(rough, ModelParams::from_mu(mu)), -kPi * mu / 4.0 - 1e-6);
    }
}

TEST(Energy, OddSymmetryIsExact)
{
    const auto g = build_grid(300);
    std::mt19937_64 rng(5);
    const auto p = ModelParams::from_mu(2.3);
    for (int i = 0; i < 10; ++i) {
        const Profile h = random_profile(g, rng, 2.0, false);
        EXPECT_EQ(energy(h.negated(), p), energy(h, p));
        const Profile gh = gradient(h, p);
        const Profile gm = gradient(h.negated(), p);
        for (std::size_t k = 0; k < h.size(); ++k) {
            EXPECT_EQ(gm[k], -gh[k]);
        }
    }
}

TEST(Gradient, VanishesAtZero)
{
    const auto g = build_grid(40);
    const Profile gz = gradient(Profile::zero(g), ModelParams::from_mu(3.0));
    for (std::size_t k = 0; k < gz.size(); ++k) {
        EXPECT_EQ(gz[k], 0.0);
    }
    EXPECT_EQ(euler_residual(Profile::zero(g), ModelParams::from_mu(3.0)), 0.0);
}

TEST(Gradient, MatchesCentralDifferences)
{
    const auto g = build_grid(400);
    std::mt19937_64 rng(3);
    for (double mu : {0.0, 1.3, 3.9}) {
        const auto p = ModelParams::from_mu(mu);
        const Profile h = random_profile(g, rng, 1.2, false);
        for (int j = 0; j < 5; ++j) {
            const Profile v = random_profile(g, rng, 1.0, false);
            const double dd = directional_derivative(h, v, p);
            const double fd = central_difference(h, v, p);
            EXPECT_LE(std::abs(dd - fd), 1e-6 * std::max(std::abs(dd), 1.0));
            EXPECT_LE(std::abs(dd - fd), 1e-6 * (1.0 + std::abs(energy(h, p))));
        }
    }
}

TEST(Gradient, CubicOrderAlongEigenfunctionAtThreshold)
{
    const auto eig = smallest_eigenpair(build_grid(512));
    const auto p = ModelParams::from_mu(0.5 * eig.gamma);
    std::vector<double> proj;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) {
        proj.push_back(inner(gradient(eig.phi.scaled(eps), p), eig.phi) / (eps * eps * eps));
    }
    EXPECT_NEAR(proj[1] / proj[0], 1.0, 1e-3);
    EXPECT_NEAR(proj[2] / proj[1], 1.0, 1e-3);
    // The leading coefficient is the projected cubic term.
    EXPECT_NEAR(proj[2] / cbar(eig.phi, p), 1.0, 1e-3);
}

TEST(Hessian, MatchesDifferencedGradient)
{
    const auto g = build_grid(64);
    std::mt19937_64 rng(8);
    const auto p = ModelParams::from_mu(2.0);
    const Profile h = random_profile(g, rng, 1.0, false);
    const Profile v = random_profile(g, rng, 1.0, false);
    const auto hv = energy_hessian(h, p).apply(std::vector<double>(v.values().begin() + 1, v.values().end()));
    const double t = 1e-6;
    const auto gp = energy_gradient_vector(h.axpy(t, v), p);
    const auto gm = energy_gradient_vector(h.axpy(-t, v), p);
    for (std::size_t i = 0; i < hv.size(); ++i) {
        const double fd = (gp[i] - gm[i]) / (2.0 * t);
        EXPECT_NEAR(hv[i], fd, 1e-6 * (1.0 + std::abs(fd)));
    }
}

TEST(EulerResidual, NonzeroAtEigenfunctionButCubicInAmplitude)
{
    const auto eig = smallest_eigenpair(build_grid(256));
    const auto p = ModelParams::from_mu(0.5 * eig.gamma);
    const double r1 = euler_residual(eig.phi.scaled(0.02), p);
    const double r2 = euler_residual(eig.phi.scaled(0.01), p);
    EXPECT_GT(r1, 1e-8);
    EXPECT_NEAR(r1 / r2, 8.0, 0.1);
}

TEST(EulerResidual, SmallAtConvergedMinimizerOnTwoGrids)
{
    const auto p = ModelParams::from_mu(2.0);
    for (std::size_t n : {256u, 512u}) {
        const auto r = minimize(p, build_grid(n), EigenSeed{});
        ASSERT_TRUE(r.converged);
        EXPECT_LT(euler_residual(r.minimizer, p), 1e-6);
        EXPECT_LT(std::abs(natural_bc_defect(r.minimizer, p)), 1e-6);
    }
}

TEST(Fold, IdentityOnTargetSet)
{
    const auto g = build_grid(50);
    const Profile h = Profile::sample(g, [](double r) { return kHalfPi * r * r; });
    const Profile f = fold(h);
    for (std::size_t k = 0; k < h.size(); ++k) {
        EXPECT_EQ(f[k], h[k]);
    }
}

TEST(Fold, ReflectsAndLandsInRange)
{
    const auto g = build_grid(8);
    std::vector<double> v{0.0, 2.0, -2.0, 4.0, 10.0, -7.0, kHalfPi, kPi, 3.0 * kPi};
    const Profile f = fold(Profile(g, v));
    EXPECT_DOUBLE_EQ(f[1], kPi - 2.0);
    EXPECT_DOUBLE_EQ(f[2], kPi - 2.0);
    EXPECT_DOUBLE_EQ(f[3], 4.0 - kPi);
    EXPECT_EQ(f[6], kHalfPi);
    for (std::size_t k = 0; k < f.size(); ++k) {
        EXPECT_GE(f[k], 0.0);
        EXPECT_LE(f[k], kHalfPi);
        EXPECT_NEAR(std::sin(f[k]) * std::sin(f[k]), std::sin(v[k]) * std::sin(v[k]), 1e-12);
    }
}

TEST(Fold, PreservesEnergyForNodeAlignedCrossings)
{
    const auto g = build_grid(512);
    std::mt19937_64 rng(21);
    const auto p = ModelParams::from_mu(1.7);
    for (int i = 0; i < 20; ++i) {
        const Profile h = node_aligned_fold_profile(g, rng);
        EXPECT_NEAR(energy(fold(h), p), energy(h, p), 1e-10);
    }
}

TEST(Fold, ArbitraryCrossingErrorShrinksWithResolution)
{
    // A kink between nodes costs O(spacing) in the discrete stiffness term.
    auto gap = [](std::size_t n) {
        const auto g = build_grid(n);
        const auto p = ModelParams::from_mu(1.0);
        const Profile h = Profile::sample(g, [](double r) { return 2.2 * r; });
        return std::abs(energy(fold(h), p) - energy(h, p));
    };
    EXPECT_LT(gap(1024), 0.75 * gap(256));
}

TEST(NonlinearSplit, ReproducesEulerOperator)
{
    const auto g = build_grid(512);
    std::mt19937_64 rng(17);
    const auto p = ModelParams::from_mu(2.0);
    for (int i = 0; i < 5; ++i) {
        const Profile h = random_profile(g, rng, 1.0, false);
        const auto s = nonlinear_split(h, p);
        const Profile gr = gradient(h, p);
        EXPECT_EQ(s.linear[0], 0.0);
        EXPECT_EQ(s.cubic[0], 0.0);
        EXPECT_EQ(s.remainder[0], 0.0);
        for (std::size_t k = 1; k < h.size(); ++k) {
            const double lhs = s.linear[k] + s.cubic[k] + s.remainder[k] - 2.0 * p.mu() * h[k];
            const double scale = 1.0 + std::abs(s.linear[k]) + std::abs(s.cubic[k]) +
                                 std::abs(s.remainder[k]) + 2.0 * std::abs(p.mu() * h[k]);
            EXPECT_LE(std::abs(lhs - gr[k]) / scale, 1e-12) << "node " << k;
        }
    }
}

TEST(NonlinearSplit, CubicHomogeneity)
{
    const auto g = build_grid(128);
    std::mt19937_64 rng(23);
    const auto p = ModelParams::from_mu(1.1);
    const Profile h = random_profile(g, rng, 1.0, false);
    const auto s = nonlinear_split(h, p);
    for (double t : {-2.0, 0.5}) {
        const auto st = nonlinear_split(h.scaled(t), p);
        for (std::size_t k = 0; k < h.size(); ++k) {
            EXPECT_EQ(st.cubic[k], t * t * t * s.cubic[k]);
        }
    }
}

TEST(NonlinearSplit, RemainderIsQuinticAlongEigenfunction)
{
    const auto eig = smallest_eigenpair(build_grid(512));
    const auto p = ModelParams::from_mu(0.5 * eig.gamma);
    std::vector<double> ratio;
    for (double eps : {1e-1, 5e-2, 2.5e-2}) {
        ratio.push_back(l2_norm(nonlinear_split(eig.phi.scaled(eps), p).remainder) /
                        (eps * eps * eps));
    }
    EXPECT_GE(ratio[0] / ratio[1], 3.0);
    EXPECT_GE(ratio[1] / ratio[2], 3.0);
}
