#pragma once

// Physical fields on the disk: the out-of-plane displacement w(r) and the
// magnetization m = (x/r sin h, y/r sin h, cos h).

#include "magnetodisk/grid.hpp"
#include "magnetodisk/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace magnetodisk {

/// Grid function without the pinned value at r = 0 (w satisfies w(1) = 0
/// instead).
struct NodalField {
    GridPtr grid;
    std::vector<double> values;
};

/// Shape-preserving piecewise-cubic Hermite interpolant (Fritsch-Butland
/// weighted harmonic-mean slopes): monotone data gives a monotone
/// interpolant, so bounds of the nodal values are never overshot.
class MonotoneCubic {
public:
    MonotoneCubic(std::span<const double> x, std::span<const double> y)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()), d_(x.size(), 0.0)
    {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) {
            throw std::invalid_argument("MonotoneCubic: need matching arrays of >= 3 points");
        }
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = x_[k + 1] - x_[k];
            delta[k] = (y_[k + 1] - y_[k]) / h[k];
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (delta[k - 1] * delta[k] <= 0.0) {
                d_[k] = 0.0;
                continue;
            }
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
        d_[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
        d_[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    double operator()(double t) const
    {
        const auto [k, s, hk] = locate(t);
        const double h10 = s * (1.0 - s) * (1.0 - s);
        const double h01 = s * s * (3.0 - 2.0 * s);
        const double h11 = s * s * (s - 1.0);
        // h00 = 1 - h01, written so that flat cells reproduce their value exactly
        return y_[k] + h01 * (y_[k + 1] - y_[k]) + hk * (h10 * d_[k] + h11 * d_[k + 1]);
    }

    double derivative(double t) const
    {
        const auto [k, s, hk] = locate(t);
        const double dh00 = 6.0 * s * (s - 1.0);
        const double dh10 = (1.0 - s) * (1.0 - 3.0 * s);
        const double dh01 = -6.0 * s * (s - 1.0);
        const double dh11 = s * (3.0 * s - 2.0);
        return (dh00 * y_[k] + dh01 * y_[k + 1]) / hk + dh10 * d_[k] + dh11 * d_[k + 1];
    }

private:
    struct Cell {
        std::size_t k;
        double s;
        double h;
    };

    Cell locate(double t) const
    {
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        k = std::min(k, x_.size() - 2);
        const double hk = x_[k + 1] - x_[k];
        return {k, (t - x_[k]) / hk, hk};
    }

    // Three-point one-sided estimate, limited to preserve shape.
    static double edge_slope(double h0, double h1, double m0, double m1)
    {
        double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (d * m0 <= 0.0) {
            d = 0.0;
        } else if (m0 * m1 <= 0.0 && std::abs(d) > 3.0 * std::abs(m0)) {
            d = 3.0 * m0;
        }
        return d;
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
};

/// Integrates w_r = -(lambda/2) sin 2h backward from w(1) = 0 with the
/// trapezoid rule on each cell.
inline NodalField reconstruct_w(const Profile& h, double lambda)
{
    const RadialGrid& grid = h.grid();
    const std::size_t n = grid.cells();
    std::vector<double> w(n + 1, 0.0);
    auto slope = [&](std::size_t k) { return -0.5 * lambda * std::sin(2.0 * h[k]); };
    for (std::size_t k = n; k-- > 0;) {
        w[k] = w[k + 1] - 0.5 * grid.spacing(k) * (slope(k) + slope(k + 1));
    }
    return {h.grid_ptr(), std::move(w)};
}

/// r dr-weighted 2-norm over interior nodes of the residual of
///   w_rr + w_r/r + (lambda/2) [ (sin 2h)_r + sin 2h / r ] = 0,
/// evaluated in the conservation form (1/r) (r w_r + (lambda/2) r sin 2h)_r
/// with the grid derivative.
inline double second_equation_residual(const Profile& h, const NodalField& w, double lambda)
{
    const RadialGrid& grid = h.grid();
    const auto r = grid.nodes();
    const auto wt = grid.weights();
    const auto wr = derivative(grid, w.values);
    std::vector<double> flux(h.size());
    for (std::size_t k = 0; k < flux.size(); ++k) {
        flux[k] = r[k] * (wr[k] + 0.5 * lambda * std::sin(2.0 * h[k]));
    }
    const auto dflux = derivative(grid, flux);
    double sum = 0.0;
    for (std::size_t k = 1; k < grid.cells(); ++k) {
        const double res = dflux[k] / r[k];
        sum += wt[k] * res * res;
    }
    return std::sqrt(sum);
}

/// pi \int [h_r^2 + (sin h/r)^2 + lambda sin 2h w_r + w_r^2] r dr, the energy
/// before eliminating w, with h_r and w_r from the grid derivative.
inline double coupled_energy(const Profile& h, const NodalField& w, double lambda)
{
    const RadialGrid& grid = h.grid();
    const auto r = grid.nodes();
    const auto hr = derivative(grid, h.values());
    const auto wr = derivative(grid, w.values);
    std::vector<double> f(h.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k) {
        const double s = std::sin(h[k]) / r[k];
        f[k] = hr[k] * hr[k] + s * s + lambda * std::sin(2.0 * h[k]) * wr[k] + wr[k] * wr[k];
    }
    return kPi * integrate(grid, f);
}

/// Magnetization of a radial profile, sampled off-grid through a monotone
/// cubic interpolant of h.
class MagnetizationField {
public:
    explicit MagnetizationField(const Profile& h)
        : interp_(h.grid().nodes(), h.values())
    {
    }

    double angle(double r) const { return r <= 0.0 ? 0.0 : interp_(r); }
    double angle_derivative(double r) const { return interp_.derivative(r); }

    std::array<double, 3> at(double x, double y) const
    {
        const double r = std::hypot(x, y);
        if (r > 1.0 + 1e-12) {
            throw std::out_of_range("magnetization_at: point outside the unit disk");
        }
        if (r == 0.0) {
            return {0.0, 0.0, 1.0};
        }
        const double a = angle(std::min(r, 1.0));
        const double s = std::sin(a);
        return {x / r * s, y / r * s, std::cos(a)};
    }

private:
    MonotoneCubic interp_;
};

inline std::array<double, 3> magnetization_at(const Profile& h, double x, double y)
{
    return MagnetizationField(h).at(x, y);
}

struct FieldSample {
    double x;
    double y;
    std::array<double, 3> m;
    double w;
};

/// Samples m and w on the points of a (2 res + 1)^2 Cartesian lattice over
/// [-1, 1]^2 that lie inside the closed unit disk.
inline std::vector<FieldSample> sample_fields(const Profile& h, const NodalField& w, std::size_t res)
{
    const MagnetizationField mag(h);
    const MonotoneCubic wi(h.grid().nodes(), w.values);
    std::vector<FieldSample> out;
    const int n = static_cast<int>(res);
    for (int j = -n; j <= n; ++j) {
        for (int i = -n; i <= n; ++i) {
            const double x = static_cast<double>(i) / n;
            const double y = static_cast<double>(j) / n;
            if (x * x + y * y > 1.0) {
                continue;
            }
            const double r = std::min(std::hypot(x, y), 1.0);
            out.push_back({x, y, mag.at(x, y), wi(r)});
        }
    }
    return out;
}

/// Max over `samples` random points with r in [0.05, 0.95] of the gap between
/// |grad m|^2 from 2D central differences of step `stencil` (all components,
/// both directions) and (sin h / r)^2 + h_r^2 from the interpolated profile.
inline double check_reduction_identity(const Profile& h, std::size_t samples, std::uint64_t seed = 7,
                                       double stencil = 1e-4)
{
    const MagnetizationField mag(h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> radius(0.05, 0.95);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double r = radius(rng);
        const double th = angle(rng);
        const double x = r * std::cos(th);
        const double y = r * std::sin(th);
        const auto xp = mag.at(x + stencil, y);
        const auto xm = mag.at(x - stencil, y);
        const auto yp = mag.at(x, y + stencil);
        const auto ym = mag.at(x, y - stencil);
        double grad2 = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double dx = (xp[c] - xm[c]) / (2.0 * stencil);
            const double dy = (yp[c] - ym[c]) / (2.0 * stencil);
            grad2 += dx * dx + dy * dy;
        }
        const double s = std::sin(mag.angle(r)) / r;
        const double hr = mag.angle_derivative(r);
        worst = std::max(worst, std::abs(grad2 - (s * s + hr * hr)));
    }
    return worst;
}

} // namespace magnetodisk
