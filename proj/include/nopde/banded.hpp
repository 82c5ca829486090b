#pragma once

#include <span>
#include <vector>

namespace nopde {

/// General band matrix of order n with kl sub- and ku superdiagonals.
/// Entry (i, j) with -ku <= i-j <= kl lives at storage[(ku + i - j) * n + j],
/// so each diagonal is contiguous.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku);

    int order() const { return n_; }
    int lower_bandwidth() const { return kl_; }
    int upper_bandwidth() const { return ku_; }

    double& at(int i, int j);
    double get(int i, int j) const;  // zero outside the band

    void matvec(std::span<const double> x, std::span<double> y) const;
    void matvec_transpose(std::span<const double> x, std::span<double> y) const;

    double max_abs() const;

private:
    friend class BandedLu;
    int n_ = 0;
    int kl_ = 0;
    int ku_ = 0;
    std::vector<double> storage_;
};

/// LU factorization with partial pivoting. Row swaps can create fill up to
/// kl positions above the original band, so the factored band keeps kl + ku
/// superdiagonals.
class BandedLu {
public:
    explicit BandedLu(const BandedMatrix& m);

    /// Throws SingularJacobianError when a pivot falls below
    /// 1e-14 * max|M| of the original matrix.
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    double& work(int i, int j) { return work_[static_cast<std::size_t>(kl_ + ku_ + i - j) * n_ + j]; }
    double work_at(int i, int j) const {
        return work_[static_cast<std::size_t>(kl_ + ku_ + i - j) * n_ + j];
    }

    int n_ = 0;
    int kl_ = 0;
    int ku_ = 0;
    std::vector<double> work_;  // (2*kl + ku + 1) x n, diagonals contiguous
    std::vector<int> pivot_;
};

/// One-shot factor-and-solve with the residual guarantee
/// ||Mx - rhs||_inf <= 1e-8 * (1 + ||rhs||_inf) for well-conditioned bands.
std::vector<double> banded_lu_solve(const BandedMatrix& m, std::span<const double> rhs);

} // namespace nopde
