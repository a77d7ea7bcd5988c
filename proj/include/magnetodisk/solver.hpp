#pragma once

// Minimization of the discrete reduced energy for fixed mu.

#include "magnetodisk/eigen.hpp"
#include "magnetodisk/operators.hpp"
#include "magnetodisk/tridiagonal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace magnetodisk {

enum class SolveStatus {
    converged,
    iteration_cap, ///< best-so-far returned
    stalled,       ///< line search found no decrease with residual above tolerance
    diverged,      ///< non-finite energy or gradient
};

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_cap: return "iteration_cap";
    case SolveStatus::stalled: return "stalled";
    case SolveStatus::diverged: return "diverged";
    }
    return "unknown";
}

struct SolveReport {
    Profile minimizer;
    double energy;
    double residual;
    std::size_t iterations;
    double mu;
    bool converged;
    std::size_t fold_applied;    ///< accepted steps on which fold changed the iterate
    std::vector<double> energy_history; ///< energy of every accepted iterate, initial first
    SolveStatus status;
};

struct SolveOptions {
    bool fold = true;
    /// Largest allowed max-norm of a single step.
    double max_step = 1.0;
    double armijo = 1e-4;
    double backtrack = 0.5;
    std::size_t max_backtracks = 60;
};

/// Symbolic initial guess epsilon * phi0.
struct EigenSeed {
    double epsilon = 0.1;
};

namespace detail {

inline bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline bool same_values(const Profile& a, const Profile& b)
{
    return std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

/// Newton direction for H, shifted by tau * 2 pi M until H + tau 2 pi M is
/// positive definite. Large shifts turn it into r dr-gradient descent.
inline std::vector<double> descent_direction(const SymTridiagonal& hessian,
                                             std::span<const double> mass,
                                             std::span<const double> grad)
{
    std::vector<double> rhs(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        rhs[i] = -grad[i];
    }
    if (auto f = TridiagonalLDLT::factor(hessian)) {
        return f->solve(rhs);
    }
    SymTridiagonal shifted = hessian;
    for (double tau = 1e-10; tau < 1e20; tau *= 10.0) {
        for (std::size_t i = 0; i < mass.size(); ++i) {
            shifted.diag[i] = hessian.diag[i] + tau * 2.0 * kPi * mass[i];
        }
        if (auto f = TridiagonalLDLT::factor(shifted)) {
            return f->solve(rhs);
        }
    }
    return {};
}

} // namespace detail

/// Minimizes energy(h, p) starting from `init`.
///
/// Each iteration takes a Newton step on the tridiagonal Hessian (shifted
/// toward gradient descent while the Hessian is indefinite), backtracks until
/// the Armijo condition holds, and, when folding is on, folds the trial point
/// before testing it, so every iterate stays in [0, pi/2] and the recorded
/// energy never increases.
///
/// Converged means euler_residual <= residual_tol and the energy changed by
/// at most energy_rel_tol * |E| over the last three iterations; a line search
/// that cannot decrease the energy further also counts as converged when the
/// residual is already below tolerance.
inline SolveReport minimize(const ModelParams& p, const Profile& init,
                            const SolveOptions& opts = {})
{
    const RadialGrid& grid = init.grid();
    const auto mass = grid.weights().subspan(1);

    Profile h = opts.fold ? fold(init) : init;
    double e = energy(h, p);
    std::size_t folds = (opts.fold && !detail::same_values(h, init)) ? 1 : 0;
    std::vector<double> history{e};

    auto report = [&](SolveStatus status, std::size_t it) {
        const double res = euler_residual(h, p);
        return SolveReport{h,  e,     res,   it, p.mu(), status == SolveStatus::converged,
                           folds, history, status};
    };

    if (!std::isfinite(e)) {
        return report(SolveStatus::diverged, 0);
    }

    for (std::size_t it = 1; it <= p.max_iterations(); ++it) {
        const auto grad = energy_gradient_vector(h, p);
        if (!detail::all_finite(grad)) {
            return report(SolveStatus::diverged, it - 1);
        }
        const double res = euler_residual(h, p);
        const std::size_t m = history.size();
        if (res <= p.residual_tol() && m >= 4 &&
            std::abs(history[m - 1] - history[m - 4]) <= p.energy_rel_tol() * std::abs(e)) {
            return report(SolveStatus::converged, it - 1);
        }

        auto dir = detail::descent_direction(energy_hessian(h, p), mass, grad);
        double slope = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) {
            slope += grad[i] * dir[i];
        }
        if (dir.empty() || !(slope < 0.0)) {
            // Fall back to the negative gradient in the r dr metric.
            dir.resize(grad.size());
            for (std::size_t i = 0; i < grad.size(); ++i) {
                dir[i] = -grad[i] / (2.0 * kPi * mass[i]);
            }
            slope = 0.0;
            for (std::size_t i = 0; i < dir.size(); ++i) {
                slope += grad[i] * dir[i];
            }
        }
        double step_norm = 0.0;
        for (double d : dir) {
            step_norm = std::max(step_norm, std::abs(d));
        }
        double t = step_norm > opts.max_step ? opts.max_step / step_norm : 1.0;

        bool accepted = false;
        for (std::size_t bt = 0; bt <= opts.max_backtracks; ++bt, t *= opts.backtrack) {
            std::vector<double> v(h.values().begin(), h.values().end());
            for (std::size_t i = 0; i < dir.size(); ++i) {
                v[i + 1] += t * dir[i];
            }
            if (!detail::all_finite(v)) {
                continue;
            }
            Profile trial(h.grid_ptr(), std::move(v));
            bool folded = false;
            if (opts.fold) {
                Profile f = fold(trial);
                folded = !detail::same_values(f, trial);
                trial = std::move(f);
            }
            const double et = energy(trial, p);
            if (std::isnan(et)) {
                return report(SolveStatus::diverged, it);
            }
            if (et <= e + opts.armijo * t * slope) {
                h = std::move(trial);
                e = et;
                history.push_back(e);
                folds += folded ? 1 : 0;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            return report(res <= p.residual_tol() ? SolveStatus::converged : SolveStatus::stalled,
                          it);
        }
    }
    const double res = euler_residual(h, p);
    const std::size_t m = history.size();
    const bool done = res <= p.residual_tol() && m >= 4 &&
                      std::abs(history[m - 1] - history[m - 4]) <= p.energy_rel_tol() * std::abs(e);
    return report(done ? SolveStatus::converged : SolveStatus::iteration_cap, p.max_iterations());
}

/// Starts from epsilon * phi0 of the grid's linearized problem.
inline SolveReport minimize(const ModelParams& p, const EigenPair& eigen, EigenSeed seed,
                            const SolveOptions& opts = {})
{
    return minimize(p, eigen.phi.scaled(seed.epsilon), opts);
}

inline SolveReport minimize(const ModelParams& p, const GridPtr& grid, EigenSeed seed = {},
                            const SolveOptions& opts = {})
{
    return minimize(p, smallest_eigenpair(grid), seed, opts);
}

/// Smooth random profile with value 0 at r = 0: a combination of the modes
/// sin((j - 1/2) pi r), j = 1..4, with coefficients uniform in
/// [-bound, bound]. With `clip` the values are clamped to [-bound, bound].
inline Profile random_profile(const GridPtr& grid, std::mt19937_64& rng, double bound = kHalfPi,
                              bool clip = true)
{
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::array<double, 4> a{};
    for (double& x : a) {
        x = coef(rng) * bound;
    }
    return Profile::sample(grid, [&](double r) {
        double v = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            v += a[j] * std::sin((static_cast<double>(j) + 0.5) * kPi * r);
        }
        return clip ? std::clamp(v, -bound, bound) : v;
    });
}

struct UniquenessReport {
    bool passed;
    double worst_norm;        ///< largest L^2(r dr) norm among converged runs
    std::size_t nontrivial;   ///< converged runs with norm above the tolerance
    std::size_t unconverged;
    std::vector<SolveReport> runs;
};

/// Multistart minimization from `trials` random profiles in [-pi/2, pi/2].
/// With expect_trivial, passes when every converged run lands within
/// `norm_tol` of h = 0; otherwise passes when at least one run is nontrivial.
inline UniquenessReport verify_trivial_uniqueness(const GridPtr& grid, const ModelParams& p,
                                                  std::size_t trials, std::uint64_t seed,
                                                  bool expect_trivial = true,
                                                  double norm_tol = 1e-6)
{
    std::mt19937_64 rng(seed);
    UniquenessReport out{true, 0.0, 0, 0, {}};
    for (std::size_t i = 0; i < trials; ++i) {
        const Profile init = random_profile(grid, rng);
        SolveReport run = minimize(p, init);
        if (run.converged) {
            const double norm = l2_norm(run.minimizer);
            out.worst_norm = std::max(out.worst_norm, norm);
            if (norm > norm_tol) {
                ++out.nontrivial;
            }
        } else {
            ++out.unconverged;
        }
        out.runs.push_back(std::move(run));
    }
    out.passed = expect_trivial ? (out.nontrivial == 0 && out.unconverged == 0)
                                : out.nontrivial > 0;
    return out;
}

} // namespace magnetodisk
