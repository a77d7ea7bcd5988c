#include "magnetodisk/eigen.hpp"
#include "magnetodisk/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace magnetodisk;

namespace {

struct Fixture : ::testing::Test {
    GridPtr grid = build_grid(512);
    EigenPair eig = smallest_eigenpair(grid);
    double mu0() const { return 0.5 * eig.gamma; }
};

} // namespace

using Solver = Fixture;

TEST_F(Solver, TrivialBelowThreshold)
{
    const auto p = ModelParams::from_mu(1.0);
    ASSERT_LT(1.0, mu0());
    std::mt19937_64 rng(2);
    for (int i = 0; i < 6; ++i) {
        const SolveReport r = minimize(p, random_profile(grid, rng));
        ASSERT_TRUE(r.converged);
        EXPECT_LT(max_abs(r.minimizer), 1e-6);
        EXPECT_GE(r.energy, -1e-9);
    }
}

TEST_F(Solver, NegativeEnergyAndPositiveProfileAboveThreshold)
{
    const auto p = ModelParams::from_mu(mu0() + 0.2);
    const SolveReport r = minimize(p, eig, EigenSeed{});
    ASSERT_TRUE(r.converged);
    EXPECT_EQ(r.status, SolveStatus::converged);
    EXPECT_LT(r.energy, 0.0);
    EXPECT_LE(r.residual, p.residual_tol());
    EXPECT_LE(std::abs(natural_bc_defect(r.minimizer, p)), p.residual_tol());
    for (std::size_t k = 1; k < r.minimizer.size(); ++k) {
        EXPECT_GT(r.minimizer[k], 0.0);
        EXPECT_LE(r.minimizer[k], kHalfPi);
    }
}

TEST_F(Solver, UnfoldedNegativeSeedGivesNegatedSolution)
{
    const auto p = ModelParams::from_mu(mu0() + 0.2);
    const SolveReport plus = minimize(p, eig, EigenSeed{});
    SolveOptions opts;
    opts.fold = false;
    const SolveReport minus = minimize(p, eig.phi.scaled(-0.1), opts);
    ASSERT_TRUE(minus.converged);
    EXPECT_EQ(minus.fold_applied, 0u);
    EXPECT_NEAR(minus.energy, plus.energy, 1e-10);
    for (std::size_t k = 0; k < plus.minimizer.size(); ++k) {
        EXPECT_NEAR(minus.minimizer[k], -plus.minimizer[k], 1e-6);
    }
}

TEST_F(Solver, FoldingMapsNegativeSeedIntoRange)
{
    const auto p = ModelParams::from_mu(2.0);
    const SolveReport r = minimize(p, eig.phi.scaled(-0.1));
    ASSERT_TRUE(r.converged);
    EXPECT_GE(r.fold_applied, 1u);
    for (std::size_t k = 0; k < r.minimizer.size(); ++k) {
        EXPECT_GE(r.minimizer[k], 0.0);
        EXPECT_LE(r.minimizer[k], kHalfPi);
    }
}

TEST_F(Solver, EnergyHistoryIsMonotone)
{
    std::mt19937_64 rng(4);
    for (double mu : {1.0, 2.0, 3.5}) {
        const SolveReport r = minimize(ModelParams::from_mu(mu), random_profile(grid, rng, 1.5));
        ASSERT_GE(r.energy_history.size(), 1u);
        for (std::size_t i = 1; i < r.energy_history.size(); ++i) {
            EXPECT_LE(r.energy_history[i], r.energy_history[i - 1]);
        }
        EXPECT_EQ(r.energy_history.back(), r.energy);
    }
}

TEST_F(Solver, IterationCapReturnsBestSoFar)
{
    auto p = ModelParams::from_mu(2.0);
    p.set_max_iterations(1);
    const Profile init = eig.phi.scaled(0.1);
    const SolveReport r = minimize(p, init);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.status, SolveStatus::iteration_cap);
    EXPECT_LE(r.energy, energy(init, p));
}

TEST_F(Solver, MinimumEnergyNonIncreasingInMu)
{
    double prev = 0.0;
    for (double mu = 1.5; mu <= 2.5 + 1e-12; mu += 0.1) {
        const SolveReport r = minimize(ModelParams::from_mu(mu), eig, EigenSeed{});
        ASSERT_TRUE(r.converged);
        EXPECT_LE(r.energy, prev + 1e-12);
        prev = r.energy;
    }
}

TEST(SolverRefinement, SecondOrderAgreementAtSharedNodes)
{
    // Node k of the n-cell grid is node 2k of the 2n-cell grid.
    const auto p = ModelParams::from_mu(2.0);
    std::vector<Profile> sols;
    for (std::size_t n : {128u, 256u, 512u}) {
        const SolveReport r = minimize(p, build_grid(n), EigenSeed{});
        ASSERT_TRUE(r.converged);
        sols.push_back(r.minimizer);
    }
    auto gap = [](const Profile& coarse, const Profile& fine) {
        double sum = 0.0;
        for (std::size_t k = 1; k < coarse.size(); ++k) {
            const double d = coarse[k] - fine[2 * k];
            sum += coarse.grid().weight(k) * d * d;
        }
        return std::sqrt(sum);
    };
    const double g1 = gap(sols[0], sols[1]);
    const double g2 = gap(sols[1], sols[2]);
    EXPECT_GT(g1 / g2, 3.0);
}

TEST_F(Solver, UniquenessAtZeroCoupling)
{
    const auto rep = verify_trivial_uniqueness(grid, ModelParams::from_mu(0.0), 8, 1);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.runs.size(), 8u);
    EXPECT_LT(rep.worst_norm, 1e-6);
}

TEST_F(Solver, UniquenessJustBelowThreshold)
{
    const auto rep = verify_trivial_uniqueness(grid, ModelParams::from_mu(mu0() - 0.05), 8, 2);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.nontrivial, 0u);
    EXPECT_EQ(rep.unconverged, 0u);
}

TEST_F(Solver, NontrivialAboveThreshold)
{
    const auto rep =
        verify_trivial_uniqueness(grid, ModelParams::from_mu(mu0() + 0.1), 8, 3, false);
    EXPECT_TRUE(rep.passed);
    EXPECT_GE(rep.nontrivial, 1u);
}
