#pragma once

// Discrete reduced energy
//
//   E(h) = pi \int_0^1 [ h_r^2 + (sin h / r)^2 - (mu/2) sin^2(2h) ] r dr
//
// and its first and second variations. The h_r^2 term is integrated exactly
// for the piecewise-linear interpolant (cell stiffness); the remaining terms
// use the lumped r dr weights of the grid. With this choice the Hessian of E
// at h = 0 is 2 pi (A - 2 mu M) with (A, M) the pencil of the linearized
// eigenproblem, so the discrete bifurcation threshold is exactly gamma0 / 2.

#include "magnetodisk/grid.hpp"
#include "magnetodisk/tridiagonal.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace magnetodisk {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Grid function with the trace condition value(0) = 0.
class Profile {
public:
    Profile(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values))
    {
        if (!grid_) {
            throw std::invalid_argument("Profile: null grid");
        }
        detail::require_size(*grid_, values_.size(), "Profile");
        if (values_.front() != 0.0) {
            throw std::invalid_argument("Profile: value at r = 0 must be 0");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("Profile: non-finite entry");
            }
        }
    }

    static Profile zero(GridPtr grid)
    {
        const std::size_t n = grid->size();
        return Profile(std::move(grid), std::vector<double>(n, 0.0));
    }

    /// Samples f at the nodes; the r = 0 entry is forced to 0.
    template <class F>
    static Profile sample(GridPtr grid, F&& f)
    {
        std::vector<double> v(grid->size());
        const auto r = grid->nodes();
        for (std::size_t k = 1; k < v.size(); ++k) {
            v[k] = f(r[k]);
        }
        return Profile(std::move(grid), std::move(v));
    }

    const RadialGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }

    Profile scaled(double t) const
    {
        std::vector<double> v(values_);
        for (double& x : v) {
            x *= t;
        }
        return Profile(grid_, std::move(v));
    }

    Profile negated() const { return scaled(-1.0); }

    /// this + t * other.
    Profile axpy(double t, const Profile& other) const
    {
        if (other.grid_ != grid_) {
            throw std::invalid_argument("Profile::axpy: profiles live on different grids");
        }
        std::vector<double> v(values_);
        for (std::size_t k = 0; k < v.size(); ++k) {
            v[k] += t * other.values_[k];
        }
        return Profile(grid_, std::move(v));
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Coupling parameters and solver tolerances. mu = lambda^2 / 2.
class ModelParams {
public:
    static ModelParams from_mu(double mu)
    {
        if (!std::isfinite(mu)) {
            throw std::invalid_argument("ModelParams: mu must be finite");
        }
        ModelParams p;
        p.mu_ = mu;
        if (mu >= 0.0) {
            p.lambda_ = std::sqrt(2.0 * mu);
        }
        return p;
    }

    static ModelParams from_lambda(double lambda)
    {
        if (!std::isfinite(lambda)) {
            throw std::invalid_argument("ModelParams: lambda must be finite");
        }
        ModelParams p;
        p.lambda_ = lambda;
        p.mu_ = 0.5 * lambda * lambda;
        return p;
    }

    /// Both given: they must satisfy |mu - lambda^2/2| <= 1e-12.
    static ModelParams from_mu_lambda(double mu, double lambda)
    {
        if (!std::isfinite(mu) || !std::isfinite(lambda)) {
            throw std::invalid_argument("ModelParams: mu and lambda must be finite");
        }
        if (std::abs(mu - 0.5 * lambda * lambda) > 1e-12) {
            throw std::invalid_argument("ModelParams: mu must equal lambda^2 / 2");
        }
        ModelParams p;
        p.mu_ = mu;
        p.lambda_ = lambda;
        return p;
    }

    double mu() const noexcept { return mu_; }
    std::optional<double> lambda() const noexcept { return lambda_; }

    double residual_tol() const noexcept { return residual_tol_; }
    double energy_rel_tol() const noexcept { return energy_rel_tol_; }
    std::size_t max_iterations() const noexcept { return max_iterations_; }

    ModelParams& set_residual_tol(double tol)
    {
        if (!(tol > 0.0)) {
            throw std::invalid_argument("ModelParams: residual tolerance must be > 0");
        }
        residual_tol_ = tol;
        return *this;
    }

    ModelParams& set_energy_rel_tol(double tol)
    {
        if (!(tol > 0.0)) {
            throw std::invalid_argument("ModelParams: energy tolerance must be > 0");
        }
        energy_rel_tol_ = tol;
        return *this;
    }

    ModelParams& set_max_iterations(std::size_t n)
    {
        if (n == 0) {
            throw std::invalid_argument("ModelParams: max iterations must be > 0");
        }
        max_iterations_ = n;
        return *this;
    }

    /// Same tolerances, different coupling.
    ModelParams with_mu(double mu) const
    {
        ModelParams p = from_mu(mu);
        p.residual_tol_ = residual_tol_;
        p.energy_rel_tol_ = energy_rel_tol_;
        p.max_iterations_ = max_iterations_;
        return p;
    }

private:
    ModelParams() = default;

    double mu_ = 0.0;
    std::optional<double> lambda_;
    double residual_tol_ = 1e-8;
    double energy_rel_tol_ = 1e-12;
    std::size_t max_iterations_ = 2000;
};

/// (f, g)_0 = \int f g r dr.
inline double inner(const Profile& f, const Profile& g)
{
    if (f.grid_ptr() != g.grid_ptr()) {
        throw std::invalid_argument("inner: profiles live on different grids");
    }
    const auto w = f.grid().weights();
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        s += w[k] * f[k] * g[k];
    }
    return s;
}

/// L^2(r dr) norm.
inline double l2_norm(const Profile& f) { return std::sqrt(inner(f, f)); }

inline double max_abs(const Profile& f)
{
    double m = 0.0;
    for (double v : f.values()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

namespace detail {

/// Cell stiffness c_k = (\int_{cell} r dr) / (r_{k+1} - r_k)^2, so that
/// \int h_r^2 r dr = sum_k c_k (h_{k+1} - h_k)^2 for piecewise-linear h.
inline std::vector<double> cell_stiffness(const RadialGrid& grid)
{
    std::vector<double> c(grid.cells());
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double d = grid.spacing(k);
        c[k] = grid.cell_mass(k) / (d * d);
    }
    return c;
}

/// (K h)_k / w_k: the discrete -(1/r)(r h_r)_r at nodes 1..N. Entry 0 is 0.
inline std::vector<double> radial_laplacian(const Profile& h)
{
    const RadialGrid& grid = h.grid();
    const auto w = grid.weights();
    const auto c = cell_stiffness(grid);
    const std::size_t n = grid.cells();
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        double flux = c[k - 1] * (h[k] - h[k - 1]);
        if (k < n) {
            flux += c[k] * (h[k] - h[k + 1]);
        }
        out[k] = flux / w[k];
    }
    return out;
}

} // namespace detail

inline double energy(const Profile& h, const ModelParams& p)
{
    const RadialGrid& grid = h.grid();
    const auto r = grid.nodes();
    const auto w = grid.weights();
    const auto c = detail::cell_stiffness(grid);
    const double mu = p.mu();

    double sum = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double dh = h[k + 1] - h[k];
        sum += c[k] * dh * dh;
    }
    for (std::size_t k = 1; k < h.size(); ++k) {
        const double s = std::sin(h[k]) / r[k];
        const double s2 = std::sin(2.0 * h[k]);
        sum += w[k] * (s * s - 0.5 * mu * s2 * s2);
    }
    return kPi * sum;
}

/// Nodal energy integrand h_r^2 + (sin h / r)^2 - (mu/2) sin^2 2h, with the
/// grid derivative for h_r and the limit h_r(0)^2 for (sin h / r)^2 at r = 0.
/// Diagnostic only; energy() does not use it.
inline std::vector<double> energy_density(const Profile& h, const ModelParams& p)
{
    const auto r = h.grid().nodes();
    const auto hr = derivative(h.grid(), h.values());
    std::vector<double> e(h.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        const double s = k == 0 ? hr[0] : std::sin(h[k]) / r[k];
        const double s2 = std::sin(2.0 * h[k]);
        e[k] = hr[k] * hr[k] + s * s - 0.5 * p.mu() * s2 * s2;
    }
    return e;
}

/// Returns g with dE(h + t v)/dt |_0 = 2 pi (g, v)_0 for every v with v(0) = 0.
/// At nodes 1..N-1 g is the strong Euler operator
///   -h_rr - h_r/r + sin 2h / (2 r^2) - mu sin 2h cos 2h;
/// the row at r = 1 carries the natural condition weakly. g(0) = 0.
inline Profile gradient(const Profile& h, const ModelParams& p)
{
    const auto r = h.grid().nodes();
    auto g = detail::radial_laplacian(h);
    for (std::size_t k = 1; k < g.size(); ++k) {
        const double s2 = std::sin(2.0 * h[k]);
        g[k] += s2 / (2.0 * r[k] * r[k]) - p.mu() * s2 * std::cos(2.0 * h[k]);
    }
    return Profile(h.grid_ptr(), std::move(g));
}

/// Euclidean gradient dE/dh_k for k = 1..N (the free unknowns).
inline std::vector<double> energy_gradient_vector(const Profile& h, const ModelParams& p)
{
    const Profile g = gradient(h, p);
    const auto w = h.grid().weights();
    std::vector<double> out(h.size() - 1);
    for (std::size_t k = 1; k < h.size(); ++k) {
        out[k - 1] = 2.0 * kPi * w[k] * g[k];
    }
    return out;
}

/// Hessian of energy() with respect to the unknowns h_1..h_N.
inline SymTridiagonal energy_hessian(const Profile& h, const ModelParams& p)
{
    const RadialGrid& grid = h.grid();
    const auto r = grid.nodes();
    const auto w = grid.weights();
    const auto c = detail::cell_stiffness(grid);
    const std::size_t n = grid.cells();
    SymTridiagonal hess;
    hess.diag.assign(n, 0.0);
    hess.off.assign(n - 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        double d = 2.0 * c[k - 1];
        if (k < n) {
            d += 2.0 * c[k];
            hess.off[k - 1] = -2.0 * kPi * c[k];
        }
        d += w[k] * (2.0 * std::cos(2.0 * h[k]) / (r[k] * r[k]) -
                     4.0 * p.mu() * std::cos(4.0 * h[k]));
        hess.diag[k - 1] = kPi * d;
    }
    return hess;
}

/// Discrete r h_r at r = 1 reconstructed from the flux balance of the last
/// half cell. It is the residual of the weakly imposed condition h_r(1) = 0.
inline double natural_bc_defect(const Profile& h, const ModelParams& p)
{
    const Profile g = gradient(h, p);
    const std::size_t n = h.grid().cells();
    return h.grid().weight(n) * g[n];
}

/// r dr-weighted 2-norm of the strong Euler residual over interior nodes plus
/// |natural_bc_defect|.
inline double euler_residual(const Profile& h, const ModelParams& p)
{
    const Profile g = gradient(h, p);
    const auto w = h.grid().weights();
    const std::size_t n = h.grid().cells();
    double sum = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        sum += w[k] * g[k] * g[k];
    }
    return std::sqrt(sum) + std::abs(w[n] * g[n]);
}

/// Maps every value into [0, pi/2]: absolute value first, then v -> pi - v on
/// values above pi/2, repeated until all values land in range.
inline Profile fold(const Profile& h)
{
    std::vector<double> v(h.values().begin(), h.values().end());
    for (double& x : v) {
        x = std::abs(x);
        while (x > kHalfPi) {
            x = std::abs(kPi - x);
        }
    }
    return Profile(h.grid_ptr(), std::move(v));
}

/// Decomposition of the Euler operator as 2 mu h = L(h) + C(h) + D(h) when
/// the Euler equation holds. All three fields vanish at r = 0.
struct NonlinearSplit {
    Profile linear;   ///< L(h) = -h_rr - h_r/r + h/r^2
    Profile cubic;    ///< C(h) = -(2/3) h^3/r^2 + (16/3) mu h^3
    Profile remainder;///< D(h), of order h^5
};

inline NonlinearSplit nonlinear_split(const Profile& h, const ModelParams& p)
{
    const auto r = h.grid().nodes();
    const double mu = p.mu();
    auto lin = detail::radial_laplacian(h);
    std::vector<double> cub(h.size(), 0.0);
    std::vector<double> rem(h.size(), 0.0);
    for (std::size_t k = 1; k < h.size(); ++k) {
        const double x = h[k];
        const double r2 = r[k] * r[k];
        const double x3 = x * x * x;
        lin[k] += x / r2;
        cub[k] = -(2.0 / 3.0) * x3 / r2 + (16.0 / 3.0) * mu * x3;
        rem[k] = -(2.0 * x / (2.0 * r2) - std::sin(2.0 * x) / (2.0 * r2)) + (2.0 / 3.0) * x3 / r2 +
                 0.5 * mu * (4.0 * x - std::sin(4.0 * x)) - (16.0 / 3.0) * mu * x3;
    }
    return {Profile(h.grid_ptr(), std::move(lin)), Profile(h.grid_ptr(), std::move(cub)),
            Profile(h.grid_ptr(), std::move(rem))};
}

} // namespace magnetodisk
