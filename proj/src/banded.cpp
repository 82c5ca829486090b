#include "nopde/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nopde/errors.hpp"

namespace nopde {

BandedMatrix::BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku) {
    if (n < 1) throw std::invalid_argument("banded matrix order must be positive");
    if (kl < 0 || ku < 0 || kl >= n || ku >= n) {
        throw std::invalid_argument("bandwidths must satisfy 0 <= kl, ku < n");
    }
    storage_.assign(static_cast<std::size_t>(kl + ku + 1) * n, 0.0);
}

double& BandedMatrix::at(int i, int j) {
    const int d = i - j;
    if (d < -ku_ || d > kl_) throw std::out_of_range("banded entry outside band");
    return storage_[static_cast<std::size_t>(ku_ + d) * n_ + j];
}

double BandedMatrix::get(int i, int j) const {
    const int d = i - j;
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || d < -ku_ || d > kl_) return 0.0;
    return storage_[static_cast<std::size_t>(ku_ + d) * n_ + j];
}

void BandedMatrix::matvec(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int d = -ku_; d <= kl_; ++d) {
        const double* diag = storage_.data() + static_cast<std::size_t>(ku_ + d) * n_;
        const int j_lo = std::max(0, -d);
        const int j_hi = std::min(n_, n_ - d);
        for (int j = j_lo; j < j_hi; ++j) y[j + d] += diag[j] * x[j];
    }
}

void BandedMatrix::matvec_transpose(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int d = -ku_; d <= kl_; ++d) {
        const double* diag = storage_.data() + static_cast<std::size_t>(ku_ + d) * n_;
        const int j_lo = std::max(0, -d);
        const int j_hi = std::min(n_, n_ - d);
        for (int j = j_lo; j < j_hi; ++j) y[j] += diag[j] * x[j + d];
    }
}

double BandedMatrix::max_abs() const {
    double m = 0.0;
    for (double v : storage_) m = std::max(m, std::fabs(v));
    return m;
}

BandedLu::BandedLu(const BandedMatrix& m) : n_(m.n_), kl_(m.kl_), ku_(m.ku_) {
    work_.assign(static_cast<std::size_t>(2 * kl_ + ku_ + 1) * n_, 0.0);
    pivot_.assign(static_cast<std::size_t>(n_), 0);
    for (int d = -ku_; d <= kl_; ++d) {
        const int j_lo = std::max(0, -d);
        const int j_hi = std::min(n_, n_ - d);
        for (int j = j_lo; j < j_hi; ++j) work(j + d, j) = m.get(j + d, j);
    }

    const double pivot_floor = 1e-14 * m.max_abs();
    const int ku_fill = ku_ + kl_;

    for (int col = 0; col < n_; ++col) {
        // Partial pivot among rows col .. col+kl.
        const int last_row = std::min(col + kl_, n_ - 1);
        int piv = col;
        double piv_mag = std::fabs(work_at(col, col));
        for (int i = col + 1; i <= last_row; ++i) {
            const double mag = std::fabs(work_at(i, col));
            if (mag > piv_mag) {
                piv = i;
                piv_mag = mag;
            }
        }
        if (!(piv_mag > pivot_floor) || !std::isfinite(piv_mag)) {
            throw SingularJacobianError("singular band matrix at column " + std::to_string(col));
        }
        pivot_[static_cast<std::size_t>(col)] = piv;
        const int last_col = std::min(col + ku_fill, n_ - 1);
        if (piv != col) {
            for (int j = col; j <= last_col; ++j) std::swap(work(col, j), work(piv, j));
        }
        const double inv_pivot = 1.0 / work_at(col, col);
        for (int i = col + 1; i <= last_row; ++i) work(i, col) *= inv_pivot;
        for (int j = col + 1; j <= last_col; ++j) {
            const double upper = work_at(col, j);
            if (upper == 0.0) continue;
            for (int i = col + 1; i <= last_row; ++i) work(i, j) -= work_at(i, col) * upper;
        }
    }
}

std::vector<double> BandedLu::solve(std::span<const double> rhs) const {
    if (static_cast<int>(rhs.size()) != n_) {
        throw std::invalid_argument("rhs length does not match matrix order");
    }
    std::vector<double> x(rhs.begin(), rhs.end());
    // Forward: apply pivots and L (unit lower, bandwidth kl).
    for (int col = 0; col < n_; ++col) {
        const int piv = pivot_[static_cast<std::size_t>(col)];
        if (piv != col) std::swap(x[static_cast<std::size_t>(col)], x[static_cast<std::size_t>(piv)]);
        const int last_row = std::min(col + kl_, n_ - 1);
        const double xc = x[static_cast<std::size_t>(col)];
        if (xc != 0.0) {
            for (int i = col + 1; i <= last_row; ++i) {
                x[static_cast<std::size_t>(i)] -= work_at(i, col) * xc;
            }
        }
    }
    // Backward: U has bandwidth ku + kl.
    const int ku_fill = ku_ + kl_;
    for (int i = n_ - 1; i >= 0; --i) {
        double sum = x[static_cast<std::size_t>(i)];
        const int last_col = std::min(i + ku_fill, n_ - 1);
        for (int j = i + 1; j <= last_col; ++j) sum -= work_at(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = sum / work_at(i, i);
    }
    return x;
}

std::vector<double> banded_lu_solve(const BandedMatrix& m, std::span<const double> rhs) {
    return BandedLu(m).solve(rhs);
}

} // namespace nopde
