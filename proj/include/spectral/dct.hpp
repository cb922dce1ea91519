#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace spectral::dct {

/// Orthonormal DCT-II basis of length n. Column u is the u-th basis
/// function:
///
///   C(a, u) = sqrt(alpha(u) / n) * cos(pi / n * (a + 1/2) * u),
///   alpha(0) = 1, alpha(u > 0) = 2.
///
/// Only a cosine table of 4n entries is held, since (2a + 1) u mod 4n
/// indexes every angle the matrix needs. Row lengths of large layers run
/// into the hundreds of thousands, where an n x n matrix does not fit.
class Basis {
public:
    explicit Basis(std::size_t n);

    std::size_t size() const { return n_; }
    double entry(std::size_t a, std::size_t u) const;
    /// Dense n x n matrix, row-major (row a, column u). Small n only.
    std::vector<double> matrix() const;

    /// z = C_t^T row. `out` must hold t values.
    void forward(std::span<const double> row, std::span<double> out) const;
    /// row = C_t z. `out` must hold n values.
    void inverse(std::span<const double> coeffs, std::span<double> out) const;

private:
    double scale(std::size_t u) const { return u == 0 ? scale0_ : scale_; }

    std::size_t n_;
    double scale0_;
    double scale_;
    std::vector<double> cos_;  // cos(pi * k / (2n)), k in [0, 4n)
};

/// Throws std::invalid_argument for n = 0.
Basis build_basis(std::size_t n);

/// Shared, immutable basis for length n. Safe to call from many threads.
std::shared_ptr<const Basis> cached_basis(std::size_t n);

/// The t lowest-frequency columns of a basis.
class TruncatedBasis {
public:
    TruncatedBasis(std::shared_ptr<const Basis> base, std::size_t t);

    std::size_t n() const { return base_->size(); }
    std::size_t t() const { return t_; }
    const Basis& base() const { return *base_; }

private:
    std::shared_ptr<const Basis> base_;
    std::size_t t_;
};

/// C_t^T row. Throws std::invalid_argument on length mismatch.
std::vector<double> forward_truncated(const TruncatedBasis& basis, std::span<const double> row);

/// C_t coeffs. Throws std::invalid_argument on length mismatch.
std::vector<double> inverse_truncated(const TruncatedBasis& basis, std::span<const double> coeffs);

}  // namespace spectral::dct
