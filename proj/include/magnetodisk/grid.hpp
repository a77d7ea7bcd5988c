#pragma once

// Radial mesh on [0, 1] with quadrature for the measure r dr.

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnetodisk {

/// Graded mesh r_k = (k/N)^grading, k = 0..N, with quadrature weights for
/// integrals of the form \int_0^1 f(r) r dr.
///
/// Weights integrate the piecewise-linear interpolant of f against r dr
/// exactly on every cell except the first, whose whole mass r_1^2/2 is
/// assigned to node 1 so that the weight at r = 0 vanishes. The weights sum
/// to 1/2 for every (N, grading).
class RadialGrid {
public:
    RadialGrid(std::size_t cells, double grading)
        : grading_(grading)
    {
        if (cells < 2) {
            throw std::invalid_argument("RadialGrid: need at least 2 cells, got " +
                                        std::to_string(cells));
        }
        if (!(grading >= 1.0) || !std::isfinite(grading)) {
            throw std::invalid_argument("RadialGrid: grading must be >= 1");
        }
        const std::size_t n = cells;
        nodes_.resize(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            nodes_[k] = std::pow(static_cast<double>(k) / static_cast<double>(n), grading);
        }
        nodes_.front() = 0.0;
        nodes_.back() = 1.0;

        weights_.assign(n + 1, 0.0);
        weights_[1] = 0.5 * nodes_[1] * nodes_[1];
        for (std::size_t k = 1; k < n; ++k) {
            const double a = nodes_[k];
            const double b = nodes_[k + 1];
            const double d = b - a;
            weights_[k] += d * (2.0 * a + b) / 6.0;
            weights_[k + 1] += d * (a + 2.0 * b) / 6.0;
        }
    }

    std::size_t cells() const noexcept { return nodes_.size() - 1; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double grading() const noexcept { return grading_; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }

    double node(std::size_t k) const { return nodes_.at(k); }
    double weight(std::size_t k) const { return weights_.at(k); }

    /// Width of cell k, i.e. r_{k+1} - r_k.
    double spacing(std::size_t k) const { return nodes_.at(k + 1) - nodes_.at(k); }

    /// \int_{r_k}^{r_{k+1}} r dr.
    double cell_mass(std::size_t k) const
    {
        const double a = nodes_.at(k);
        const double b = nodes_.at(k + 1);
        return 0.5 * (b - a) * (b + a);
    }

    double max_spacing() const noexcept
    {
        double h = 0.0;
        for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
            h = std::max(h, nodes_[k + 1] - nodes_[k]);
        }
        return h;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    double grading_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// `cells` is the number of intervals N (the grid has N + 1 nodes).
inline GridPtr build_grid(std::size_t cells, double grading = 2.0)
{
    return std::make_shared<const RadialGrid>(cells, grading);
}

namespace detail {
inline void require_size(const RadialGrid& grid, std::size_t n, const char* what)
{
    if (n != grid.size()) {
        throw std::invalid_argument(std::string(what) + ": expected " +
                                    std::to_string(grid.size()) + " nodal values, got " +
                                    std::to_string(n));
    }
}
} // namespace detail

/// Sum_k w_k f_k, approximating \int_0^1 f r dr.
inline double integrate(const RadialGrid& grid, std::span<const double> f)
{
    detail::require_size(grid, f.size(), "integrate");
    const auto w = grid.weights();
    double sum = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        sum += w[k] * f[k];
    }
    return sum;
}

/// Second-order three-point derivative on the nonuniform mesh, one-sided at
/// both ends. Exact for quadratics.
inline std::vector<double> derivative(const RadialGrid& grid, std::span<const double> f)
{
    detail::require_size(grid, f.size(), "derivative");
    const auto r = grid.nodes();
    const std::size_t n = grid.cells();
    std::vector<double> df(f.size());

    {
        const double h1 = r[1] - r[0];
        const double h2 = r[2] - r[1];
        df[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] -
                h1 / (h2 * (h1 + h2)) * f[2];
    }
    for (std::size_t k = 1; k < n; ++k) {
        const double h1 = r[k] - r[k - 1];
        const double h2 = r[k + 1] - r[k];
        df[k] = -h2 / (h1 * (h1 + h2)) * f[k - 1] + (h2 - h1) / (h1 * h2) * f[k] +
                h1 / (h2 * (h1 + h2)) * f[k + 1];
    }
    {
        const double h1 = r[n - 1] - r[n - 2];
        const double h2 = r[n] - r[n - 1];
        df[n] = h2 / (h1 * (h1 + h2)) * f[n - 2] - (h1 + h2) / (h1 * h2) * f[n - 1] +
                (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n];
    }
    return df;
}

} // namespace magnetodisk
