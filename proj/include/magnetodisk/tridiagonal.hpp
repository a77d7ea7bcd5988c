#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace magnetodisk {

/// Symmetric tridiagonal matrix: diag has n entries, off has n - 1 (off[i]
/// couples rows i and i + 1).
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const noexcept { return diag.size(); }

    std::vector<double> apply(std::span<const double> x) const
    {
        if (x.size() != diag.size()) {
            throw std::invalid_argument("SymTridiagonal::apply: size mismatch");
        }
        const std::size_t n = diag.size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = diag[i] * x[i];
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            y[i] += off[i] * x[i + 1];
            y[i + 1] += off[i] * x[i];
        }
        return y;
    }
};

/// LDL^T factorization of a symmetric tridiagonal matrix. Succeeds only when
/// every pivot is strictly positive, i.e. the matrix is positive definite.
class TridiagonalLDLT {
public:
    static std::optional<TridiagonalLDLT> factor(const SymTridiagonal& a)
    {
        const std::size_t n = a.size();
        TridiagonalLDLT f;
        f.d_.resize(n);
        f.l_.resize(n > 0 ? n - 1 : 0);
        for (std::size_t i = 0; i < n; ++i) {
            double pivot = a.diag[i];
            if (i > 0) {
                pivot -= f.l_[i - 1] * a.off[i - 1];
            }
            if (!(pivot > 0.0)) {
                return std::nullopt;
            }
            f.d_[i] = pivot;
            if (i + 1 < n) {
                f.l_[i] = a.off[i] / pivot;
            }
        }
        return f;
    }

    std::vector<double> solve(std::span<const double> b) const
    {
        const std::size_t n = d_.size();
        if (b.size() != n) {
            throw std::invalid_argument("TridiagonalLDLT::solve: size mismatch");
        }
        std::vector<double> x(b.begin(), b.end());
        for (std::size_t i = 1; i < n; ++i) {
            x[i] -= l_[i - 1] * x[i - 1];
        }
        for (std::size_t i = 0; i < n; ++i) {
            x[i] /= d_[i];
        }
        for (std::size_t i = n; i-- > 1;) {
            x[i - 1] -= l_[i - 1] * x[i];
        }
        return x;
    }

private:
    std::vector<double> d_;
    std::vector<double> l_;
};

} // namespace magnetodisk
