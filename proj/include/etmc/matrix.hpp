#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace etmc {

using Vector = std::vector<double>;

/**
 * @brief Dense n x n real matrix, row-major storage.
 *
 * Sized for channel state spaces (n up to a few hundred). Entry (i, j) is row i,
 * column j; indices are 0-based here, the 1-based channel-state convention lives
 * at the I/O boundary.
 */
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t order, double fill = 0.0);

    /// Builds from nested rows; throws DomainError unless square and finite.
    static SquareMatrix from_rows(const std::vector<Vector>& rows);
    static SquareMatrix from_columns(const std::vector<Vector>& columns);
    static SquareMatrix identity(std::size_t order);
    static SquareMatrix diagonal(std::span<const double> diag);

    std::size_t order() const noexcept { return n_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

    Vector column(std::size_t j) const;
    Vector row(std::size_t i) const;

    SquareMatrix operator*(const SquareMatrix& rhs) const;
    SquareMatrix operator+(const SquareMatrix& rhs) const;
    SquareMatrix operator-(const SquareMatrix& rhs) const;
    SquareMatrix operator*(double s) const;

    /// m * v
    Vector apply(std::span<const double> v) const;
    /// v^T * m, returned as a plain vector.
    Vector apply_left(std::span<const double> v) const;

    bool all_finite() const noexcept;
    bool nonnegative() const noexcept;
    double max_abs_diff(const SquareMatrix& other) const;

    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t n_ = 0;
    Vector data_;
};

double dot(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> v, double s);

/**
 * @brief Spectral radius of an elementwise-nonnegative (or nonpositive) matrix.
 *
 * Power iteration on the shifted matrix |m| + I from the all-ones vector; the
 * shift makes the Perron root dominant even for periodic matrices. Stops when
 * successive estimates agree to 1e-12 relative or the Collatz-Wielandt bracket
 * closes, capped at 100000 iterations (NumericalFailure). Mixed-sign input is a
 * DomainError.
 */
double spectral_radius(const SquareMatrix& m);

/// LU factorization with partial pivoting.
class LuDecomposition {
public:
    explicit LuDecomposition(const SquareMatrix& m);

    /// Solves m x = rhs.
    Vector solve(std::span<const double> rhs) const;
    /// Solves x^T m = rhs^T, i.e. m^T x = rhs.
    Vector solve_transposed(std::span<const double> rhs) const;
    SquareMatrix inverse() const;

private:
    std::size_t n_;
    SquareMatrix lu_;
    std::vector<std::size_t> perm_;
};

/// (I - m)^-1 via LU. Throws DivergentSeries(1, rho) unless rho(m) < 1.
SquareMatrix neumann_inverse(const SquareMatrix& m);

/// m^k by repeated squaring; m^0 = I.
SquareMatrix mat_power(const SquareMatrix& m, unsigned k);

}  // namespace etmc
