#include "magnetodisk/grid.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace magnetodisk;

namespace {

std::vector<double> sample(const RadialGrid& g, double (*f)(double))
{
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = f(g.node(k));
    }
    return v;
}

} // namespace

TEST(Grid, TwoCellsUniform)
{
    const RadialGrid g(2, 1.0);
    ASSERT_EQ(g.size(), 3u);
    EXPECT_EQ(g.node(0), 0.0);
    EXPECT_EQ(g.node(1), 0.5);
    EXPECT_EQ(g.node(2), 1.0);
    EXPECT_NEAR(g.weight(0) + g.weight(1) + g.weight(2), 0.5, 1e-15);
}

TEST(Grid, NodesAndWeightsInvariants)
{
    for (std::size_t n : {2u, 3u, 8u, 100u, 511u, 4096u}) {
        for (double grading : {1.0, 1.5, 2.0, 3.0}) {
            const RadialGrid g(n, grading);
            EXPECT_EQ(g.node(0), 0.0);
            EXPECT_EQ(g.node(n), 1.0);
            EXPECT_EQ(g.weight(0), 0.0);
            double sum = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                EXPECT_GE(g.weight(k), 0.0);
                if (k > 0) {
                    EXPECT_GT(g.node(k), g.node(k - 1));
                }
                sum += g.weight(k);
            }
            EXPECT_NEAR(sum, 0.5, 1e-12) << "n=" << n << " grading=" << grading;
        }
    }
}

TEST(Grid, GradingClustersNodesNearOrigin)
{
    const RadialGrid g(64, 2.0);
    EXPECT_LT(g.spacing(0), g.spacing(63));
    EXPECT_DOUBLE_EQ(g.node(1), 1.0 / (64.0 * 64.0));
}

TEST(Grid, RejectsBadArguments)
{
    EXPECT_THROW(RadialGrid(1, 2.0), std::invalid_argument);
    EXPECT_THROW(RadialGrid(0, 2.0), std::invalid_argument);
    EXPECT_THROW(RadialGrid(8, 0.5), std::invalid_argument);
    EXPECT_THROW(RadialGrid(8, std::nan("")), std::invalid_argument);
}

TEST(Integrate, ConstantsAndZero)
{
    const auto g = build_grid(37, 2.0);
    EXPECT_EQ(integrate(*g, std::vector<double>(g->size(), 0.0)), 0.0);
    EXPECT_NEAR(integrate(*g, std::vector<double>(g->size(), 2.0)), 1.0, 1e-14);
    EXPECT_NEAR(integrate(*g, std::vector<double>(g->size(), 1.0)), 0.5, 1e-14);
}

TEST(Integrate, LinearFunctionOfR)
{
    const auto g = build_grid(512, 2.0);
    EXPECT_NEAR(integrate(*g, sample(*g, [](double r) { return r; })), 1.0 / 3.0, 1e-5);
}

TEST(Integrate, MatchesAdaptiveSimpson)
{
    const auto g = build_grid(1024, 2.0);
    auto f = [](double r) { return r == 0.0 ? std::numbers::pi : std::sin(std::numbers::pi * r) / r; };
    std::vector<double> v(g->size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = f(g->node(k));
    }
    const double ref = oracle::simpson([&](double r) { return f(r) * r; }, 0.0, 1.0);
    EXPECT_NEAR(integrate(*g, v), ref, 1e-6);
}

TEST(Integrate, IsLinear)
{
    const auto g = build_grid(200, 2.0);
    const auto a = sample(*g, [](double r) { return std::cos(3.0 * r); });
    const auto b = sample(*g, [](double r) { return r * r * r - 0.2; });
    std::vector<double> c(a.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = 1.7 * a[k] - 0.3 * b[k];
    }
    EXPECT_NEAR(integrate(*g, c), 1.7 * integrate(*g, a) - 0.3 * integrate(*g, b), 1e-15);
}

TEST(Integrate, SecondOrderUnderRefinement)
{
    auto err = [](std::size_t n) {
        const auto g = build_grid(n, 2.0);
        const double ref = std::sin(1.0) + std::cos(1.0) - 1.0;
        return std::abs(integrate(*g, sample(*g, [](double r) { return std::cos(r); })) - ref);
    };
    double prev = err(32);
    for (std::size_t n = 64; n <= 1024; n *= 2) {
        const double cur = err(n);
        EXPECT_GT(prev / cur, 3.5) << "n=" << n;
        prev = cur;
    }
}

TEST(Integrate, RejectsWrongSize)
{
    const auto g = build_grid(10, 2.0);
    EXPECT_THROW(integrate(*g, std::vector<double>(5, 1.0)), std::invalid_argument);
}

TEST(Derivative, ConstantsGiveZero)
{
    const auto g = build_grid(33, 2.0);
    for (double d : derivative(*g, std::vector<double>(g->size(), 4.2))) {
        EXPECT_NEAR(d, 0.0, 1e-9);
    }
}

TEST(Derivative, ExactForLinearAndQuadratic)
{
    for (double grading : {1.0, 2.0, 2.7}) {
        const auto g = build_grid(57, grading);
        const auto lin = derivative(*g, sample(*g, [](double r) { return 3.0 * r - 1.0; }));
        const auto quad = derivative(*g, sample(*g, [](double r) { return r * r; }));
        for (std::size_t k = 0; k < g->size(); ++k) {
            EXPECT_NEAR(lin[k], 3.0, 1e-10);
            EXPECT_NEAR(quad[k], 2.0 * g->node(k), 1e-10);
        }
    }
}

TEST(Derivative, SineConverges)
{
    const auto g = build_grid(512, 2.0);
    const auto d = derivative(*g, sample(*g, [](double r) { return std::sin(r); }));
    double worst = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) {
        worst = std::max(worst, std::abs(d[k] - std::cos(g->node(k))));
    }
    EXPECT_LT(worst, 1e-4);
}
