#pragma once

// Linearized problem at h = 0:
//   -phi_rr - phi_r/r + phi/r^2 = gamma phi,  phi(0) = 0,  phi_r(1) = 0.
// Its smallest eigenvalue gamma0 fixes the bifurcation threshold mu = gamma0/2.

#include "magnetodisk/grid.hpp"
#include "magnetodisk/operators.hpp"
#include "magnetodisk/tridiagonal.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnetodisk {

/// Generalized pencil A phi = gamma M phi on the unknowns at nodes 1..N.
/// A discretizes \int (v_r w_r + v w / r^2) r dr; M is the lumped r dr mass.
struct Pencil {
    SymTridiagonal stiffness;
    std::vector<double> mass;
};

struct EigenPair {
    double gamma;
    Profile phi;
    double residual; ///< ||A phi - gamma M phi||_{M^{-1}}
    std::size_t iterations;
};

class EigenNonConvergence : public std::runtime_error {
public:
    EigenNonConvergence(double last_rayleigh, std::size_t iterations)
        : std::runtime_error("inverse iteration did not converge after " +
                             std::to_string(iterations) + " iterations (last Rayleigh quotient " +
                             std::to_string(last_rayleigh) + ")"),
          last_rayleigh_(last_rayleigh)
    {
    }
    double last_rayleigh() const noexcept { return last_rayleigh_; }

private:
    double last_rayleigh_;
};

inline Pencil assemble_pencil(const RadialGrid& grid)
{
    const std::size_t n = grid.cells();
    const auto r = grid.nodes();
    const auto w = grid.weights();
    const auto c = detail::cell_stiffness(grid);
    Pencil pencil;
    pencil.stiffness.diag.assign(n, 0.0);
    pencil.stiffness.off.assign(n - 1, 0.0);
    pencil.mass.assign(n, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        double d = c[k - 1] + w[k] / (r[k] * r[k]);
        if (k < n) {
            d += c[k];
            pencil.stiffness.off[k - 1] = -c[k];
        }
        pencil.stiffness.diag[k - 1] = d;
        pencil.mass[k - 1] = w[k];
    }
    return pencil;
}

namespace detail {

/// v^T A v as a sum of nonnegative cell and node terms, free of the
/// cancellation in forming A v first. x holds the unknowns at nodes 1..N.
inline double stiffness_form(const RadialGrid& grid, std::span<const double> x)
{
    const auto r = grid.nodes();
    const auto w = grid.weights();
    const auto c = cell_stiffness(grid);
    double sum = c[0] * x[0] * x[0];
    for (std::size_t k = 1; k < c.size(); ++k) {
        const double d = x[k] - x[k - 1];
        sum += c[k] * d * d;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += w[i + 1] * x[i] * x[i] / (r[i + 1] * r[i + 1]);
    }
    return sum;
}

} // namespace detail

/// Discrete Rayleigh quotient v^T A v / v^T M v of a profile.
inline double rayleigh_quotient(const Profile& v)
{
    const std::span<const double> x = v.values().subspan(1);
    const auto w = v.grid().weights();
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += w[i + 1] * x[i] * x[i];
    }
    return detail::stiffness_form(v.grid(), x) / den;
}

namespace detail {

inline double m_dot(std::span<const double> m, std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += m[i] * a[i] * b[i];
    }
    return s;
}

/// Inverse iteration with shift 0, M-orthogonalized against `deflate`.
inline EigenPair inverse_iteration(const RadialGrid& grid, GridPtr grid_ptr,
                                   std::span<const std::vector<double>> deflate,
                                   std::size_t max_iterations, double tol)
{
    const Pencil pencil = assemble_pencil(grid);
    const auto factor = TridiagonalLDLT::factor(pencil.stiffness);
    if (!factor) {
        throw std::runtime_error("assemble_pencil: stiffness is not positive definite");
    }
    const auto& m = pencil.mass;
    const std::size_t n = m.size();
    const auto r = grid.nodes();

    auto project = [&](std::vector<double>& x) {
        for (const auto& q : deflate) {
            const double a = m_dot(m, q, x);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] -= a * q[i];
            }
        }
        const double norm = std::sqrt(m_dot(m, x, x));
        for (double& v : x) {
            v /= norm;
        }
    };

    // Positive start vector with zero slope at r = 1 plus a cubic term so it
    // keeps a component along every low mode after deflation.
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rr = r[i + 1];
        x[i] = rr * (1.0 - 0.5 * rr) + 0.1 * rr * rr * rr;
    }
    project(x);

    double rq = 0.0;
    double rq_prev = 0.0;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = m[i] * x[i];
        }
        x = factor->solve(b);
        project(x);
        rq = stiffness_form(grid, x);
        if (it > 1 && std::abs(rq - rq_prev) <= tol * std::abs(rq)) {
            const auto ax = pencil.stiffness.apply(x);
            double res = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e = ax[i] - rq * m[i] * x[i];
                res += e * e / m[i];
            }
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sum += m[i] * x[i];
            }
            if (sum < 0.0) {
                for (double& v : x) {
                    v = -v;
                }
            }
            std::vector<double> values(n + 1, 0.0);
            std::copy(x.begin(), x.end(), values.begin() + 1);
            return {rq, Profile(std::move(grid_ptr), std::move(values)), std::sqrt(res), it};
        }
        rq_prev = rq;
    }
    throw EigenNonConvergence(rq, max_iterations);
}

} // namespace detail

/// Smallest eigenpair by inverse iteration. phi0 is M-normalized and signed
/// so that \int phi0 r dr > 0.
inline EigenPair smallest_eigenpair(const GridPtr& grid, std::size_t max_iterations = 500,
                                    double tol = 1e-14)
{
    return detail::inverse_iteration(*grid, grid, {}, max_iterations, tol);
}

/// Second eigenpair, by deflation against the first.
inline EigenPair next_eigenpair(const EigenPair& first, std::size_t max_iterations = 2000,
                                double tol = 1e-14)
{
    const auto vals = first.phi.values();
    std::vector<std::vector<double>> deflate{std::vector<double>(vals.begin() + 1, vals.end())};
    return detail::inverse_iteration(first.phi.grid(), first.phi.grid_ptr(), deflate,
                                     max_iterations, tol);
}

} // namespace magnetodisk
