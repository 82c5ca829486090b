#pragma once

// Independent oracles for the unit and acceptance tests. Everything here is
// deliberately brute force and shares no code path with the library solvers.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nopde/grid.hpp"
#include "nopde/problems.hpp"
#include "nopde/rng.hpp"

namespace testhelpers {

/// Dense row-major matrix solve via Gaussian elimination with partial
/// pivoting; the reference for the banded LU.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw std::invalid_argument("dense_solve shape");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < n; ++i) {
            if (std::fabs(a[i * n + col]) > std::fabs(a[piv * n + col])) piv = i;
        }
        if (a[piv * n + col] == 0.0) throw std::runtime_error("dense_solve: singular");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
            std::swap(b[col], b[piv]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = a[i * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a[i * n + j] -= f * a[col * n + j];
            b[i] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t j = i + 1; j < n; ++j) sum -= a[i * n + j] * x[j];
        x[i] = sum / a[i * n + i];
    }
    return x;
}

/// Dense Jacobian of a vector map by central differences.
inline std::vector<double> fd_jacobian(const std::function<std::vector<double>(const std::vector<double>&)>& f,
                                       const std::vector<double>& x, double eps = 1e-6) {
    const std::size_t n = x.size();
    const std::size_t m = f(x).size();
    std::vector<double> jac(m * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> xp = x, xm = x;
        xp[j] += eps;
        xm[j] -= eps;
        const std::vector<double> fp = f(xp);
        const std::vector<double> fm = f(xm);
        for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (fp[i] - fm[i]) / (2.0 * eps);
    }
    return jac;
}

/// Least-squares slope of log(err) against log(h); the observed order.
inline double richardson_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
    const std::size_t n = hs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(hs[i]);
        const double y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline nopde::GridFunction random_field(nopde::Rng& rng, const nopde::Grid& grid, double amp = 1.0,
                                        nopde::BoundarySpec b = nopde::BoundarySpec::zero()) {
    nopde::GridFunction u(grid, b);
    for (auto& v : u.values) v = rng.uniform(-amp, amp);
    return u;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b,
                           double floor = 1e-12) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
        m = std::max(m, std::fabs(a[i] - b[i]) / denom);
    }
    return m;
}

} // namespace testhelpers
