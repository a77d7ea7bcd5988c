#pragma once

// Branches of nontrivial critical points near mu0 = gamma0 / 2.
//
// Writing 2 mu = gamma0 + delta and h = beta phi0 + P h with (P h, phi0)_0 = 0,
// the projection of the Euler equation onto phi0 reduces at lowest order to
//   -delta beta + cbar beta^3 = 0,   cbar = (C(phi0), phi0)_0,
// a supercritical pitchfork with beta = +-sqrt(delta / cbar) for delta > 0.

#include "magnetodisk/eigen.hpp"
#include "magnetodisk/operators.hpp"
#include "magnetodisk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnetodisk {

/// (C(phi0), phi0)_0 = \int [-(2/3) phi0^4 / r + (16/3) mu phi0^4 r] dr.
inline double cbar(const Profile& phi0, const ModelParams& p)
{
    const auto r = phi0.grid().nodes();
    const auto w = phi0.grid().weights();
    double sum = 0.0;
    for (std::size_t k = 1; k < phi0.size(); ++k) {
        const double f2 = phi0[k] * phi0[k];
        const double f4 = f2 * f2;
        sum += w[k] * (-(2.0 / 3.0) * f4 / (r[k] * r[k]) + (16.0 / 3.0) * p.mu() * f4);
    }
    return sum;
}

struct AmplitudeRoot {
    double beta;
    bool stable;
};

/// Roots of -delta beta + cbar beta^3 = 0 with delta = 2 mu - gamma0.
/// A root is stable when the derivative -delta + 3 cbar beta^2 is positive,
/// or, for the trivial root, when delta <= 0.
inline std::vector<AmplitudeRoot> predicted_amplitude(double mu, double gamma0, double cbar_value)
{
    if (!(cbar_value > 0.0)) {
        throw std::invalid_argument("predicted_amplitude: cbar must be positive");
    }
    const double delta = 2.0 * mu - gamma0;
    if (delta <= 0.0) {
        return {{0.0, true}};
    }
    const double beta = std::sqrt(delta / cbar_value);
    return {{beta, true}, {-beta, true}, {0.0, false}};
}

enum class Branch { trivial, plus, minus };

inline const char* to_string(Branch b)
{
    switch (b) {
    case Branch::trivial: return "trivial";
    case Branch::plus: return "plus";
    case Branch::minus: return "minus";
    }
    return "unknown";
}

struct BranchPoint {
    double mu;
    Branch branch;
    double beta;   ///< (h, phi0)_0
    double energy;
    std::optional<std::size_t> profile_id; ///< index into BifurcationDiagram::profiles

    double delta(double gamma0) const noexcept { return 2.0 * mu - gamma0; }
};

struct ContinuationOptions {
    double seed_epsilon = 0.1;
    /// |beta| at or below this counts as the trivial solution.
    double amplitude_tol = 1e-6;
    /// Neighborhood sizes around the threshold. They gate checks, not the
    /// continuation itself.
    double delta0 = 0.5;
    double rho0 = 1.0;
};

struct BifurcationDiagram {
    double gamma0 = 0.0;
    double cbar = 0.0; ///< at mu0 = gamma0 / 2
    double delta0 = 0.5;
    double rho0 = 1.0;
    std::vector<BranchPoint> points;
    std::vector<Profile> profiles;
    bool complete = true;
    std::string diagnostic;

    /// Smallest mu carrying a nontrivial point.
    std::optional<double> detected_threshold() const
    {
        std::optional<double> best;
        for (const auto& pt : points) {
            if (pt.branch != Branch::trivial && (!best || pt.mu < *best)) {
                best = pt.mu;
            }
        }
        return best;
    }

    /// Lowest energy recorded at `mu`.
    std::optional<double> min_energy(double mu) const
    {
        std::optional<double> best;
        for (const auto& pt : points) {
            if (pt.mu == mu && (!best || pt.energy < *best)) {
                best = pt.energy;
            }
        }
        return best;
    }

    /// True when no nontrivial point lies at or below gamma0/2 - delta0.
    bool respects_margin() const
    {
        return std::none_of(points.begin(), points.end(), [&](const BranchPoint& pt) {
            return pt.branch != Branch::trivial && pt.mu <= 0.5 * gamma0 - delta0;
        });
    }
};

/// Least-squares slope of log beta against log delta over the plus-branch
/// points in the last decade of delta, [dmin, 10 dmin]. When that decade holds
/// a single point the next-smallest delta is added. Returns nullopt with fewer
/// than two plus points at positive delta.
inline std::optional<double> amplitude_fit_slope(const BifurcationDiagram& d)
{
    std::vector<std::pair<double, double>> all;
    for (const auto& pt : d.points) {
        const double delta = pt.delta(d.gamma0);
        if (pt.branch == Branch::plus && delta > 0.0 && pt.beta > 0.0) {
            all.emplace_back(delta, pt.beta);
        }
    }
    std::sort(all.begin(), all.end());
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (i < 2 || all[i].first <= 10.0 * all.front().first) {
            pts.emplace_back(std::log(all[i].first), std::log(all[i].second));
        }
    }
    if (pts.size() < 2) {
        return std::nullopt;
    }
    double sx = 0.0, sy = 0.0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double n = static_cast<double>(pts.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) {
        return std::nullopt;
    }
    return sxy / sxx;
}

/// Evenly spaced mu values lo, ..., hi (steps values, both ends included).
inline std::vector<double> mu_samples(double lo, double hi, std::size_t steps)
{
    if (!(lo < hi) || steps < 2) {
        throw std::invalid_argument("mu range needs lo < hi and at least 2 steps");
    }
    std::vector<double> mus(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        mus[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
    mus.back() = hi;
    return mus;
}

/// Sweeps given mu values in increasing order, one minimization per value.
///
/// The trivial branch is recorded at every mu. The plus branch is the solver
/// result when it is nontrivial, seeded from the previous plus profile or from
/// epsilon * phi0 when none exists yet; the minus branch is its negation.
inline BifurcationDiagram trace_branches(const EigenPair& eigen, std::vector<double> mus,
                                         const ModelParams& base,
                                         const ContinuationOptions& opts = {})
{
    std::sort(mus.begin(), mus.end());
    BifurcationDiagram d;
    d.gamma0 = eigen.gamma;
    d.cbar = cbar(eigen.phi, base.with_mu(0.5 * eigen.gamma));
    d.delta0 = opts.delta0;
    d.rho0 = opts.rho0;

    std::optional<Profile> previous;
    for (double mu : mus) {
        const ModelParams p = base.with_mu(mu);
        d.points.push_back({mu, Branch::trivial, 0.0, 0.0, std::nullopt});

        const Profile seed = previous ? *previous : eigen.phi.scaled(opts.seed_epsilon);
        SolveReport run = minimize(p, seed);
        if (run.status == SolveStatus::diverged || run.status == SolveStatus::stalled) {
            d.complete = false;
            d.diagnostic = std::string("solver ") + to_string(run.status) + " at mu = " +
                           std::to_string(mu);
            break;
        }
        if (!run.converged) {
            d.complete = false;
            d.diagnostic = "solver hit the iteration cap at mu = " + std::to_string(mu);
            break;
        }
        const double beta = inner(run.minimizer, eigen.phi);
        if (std::abs(beta) > opts.amplitude_tol && run.energy < 0.0) {
            const Profile minus = run.minimizer.negated();
            const double e_minus = energy(minus, p);
            d.profiles.push_back(run.minimizer);
            d.points.push_back({mu, Branch::plus, beta, run.energy, d.profiles.size() - 1});
            d.profiles.push_back(minus);
            d.points.push_back({mu, Branch::minus, -beta, e_minus, d.profiles.size() - 1});
            previous = run.minimizer;
        } else {
            previous.reset();
        }
    }
    std::stable_sort(d.points.begin(), d.points.end(), [](const BranchPoint& a, const BranchPoint& b) {
        if (a.mu != b.mu) {
            return a.mu < b.mu;
        }
        return static_cast<int>(a.branch) < static_cast<int>(b.branch);
    });
    return d;
}

inline BifurcationDiagram trace_branches(const GridPtr& grid, double lo, double hi,
                                         std::size_t steps, const ModelParams& base,
                                         const ContinuationOptions& opts = {})
{
    return trace_branches(smallest_eigenpair(grid), mu_samples(lo, hi, steps), base, opts);
}

} // namespace magnetodisk
