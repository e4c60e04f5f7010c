#include "etmc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "etmc/errors.hpp"

namespace etmc {

SquareMatrix::SquareMatrix(std::size_t order, double fill) : n_(order), data_(order * order, fill) {
    if (order == 0) throw DomainError("matrix order must be >= 1");
}

SquareMatrix SquareMatrix::from_rows(const std::vector<Vector>& rows) {
    SquareMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw DomainError("dimension mismatch: matrix is not square");
        for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    }
    if (!m.all_finite()) throw DomainError("matrix has non-finite entries");
    return m;
}

SquareMatrix SquareMatrix::from_columns(const std::vector<Vector>& columns) {
    SquareMatrix m(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != columns.size()) throw DomainError("dimension mismatch: matrix is not square");
        for (std::size_t i = 0; i < columns.size(); ++i) m(i, j) = columns[j][i];
    }
    if (!m.all_finite()) throw DomainError("matrix has non-finite entries");
    return m;
}

SquareMatrix SquareMatrix::identity(std::size_t order) {
    SquareMatrix m(order);
    for (std::size_t i = 0; i < order; ++i) m(i, i) = 1.0;
    return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> diag) {
    SquareMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

Vector SquareMatrix::column(std::size_t j) const {
    Vector c(n_);
    for (std::size_t i = 0; i < n_; ++i) c[i] = (*this)(i, j);
    return c;
}

Vector SquareMatrix::row(std::size_t i) const {
    return Vector(data_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                  data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_));
}

SquareMatrix SquareMatrix::operator*(const SquareMatrix& rhs) const {
    if (rhs.n_ != n_) throw DomainError("dimension mismatch in matrix product");
    SquareMatrix out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = 0; k < n_; ++k) {
            const double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < n_; ++j) out(i, j) += aik * rhs(k, j);
        }
    }
    return out;
}

SquareMatrix SquareMatrix::operator+(const SquareMatrix& rhs) const {
    if (rhs.n_ != n_) throw DomainError("dimension mismatch in matrix sum");
    SquareMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

SquareMatrix SquareMatrix::operator-(const SquareMatrix& rhs) const {
    if (rhs.n_ != n_) throw DomainError("dimension mismatch in matrix difference");
    SquareMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

SquareMatrix SquareMatrix::operator*(double s) const {
    SquareMatrix out = *this;
    for (double& x : out.data_) x *= s;
    return out;
}

Vector SquareMatrix::apply(std::span<const double> v) const {
    if (v.size() != n_) throw DomainError("dimension mismatch in matrix-vector product");
    Vector out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

Vector SquareMatrix::apply_left(std::span<const double> v) const {
    if (v.size() != n_) throw DomainError("dimension mismatch in vector-matrix product");
    Vector out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < n_; ++j) out[j] += vi * (*this)(i, j);
    }
    return out;
}

bool SquareMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

bool SquareMatrix::nonnegative() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return x >= 0.0; });
}

double SquareMatrix::max_abs_diff(const SquareMatrix& other) const {
    if (other.n_ != n_) throw DomainError("dimension mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) worst = std::max(worst, std::abs(data_[i] - other.data_[i]));
    return worst;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("dimension mismatch in dot product");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector scaled(std::span<const double> v, double s) {
    Vector out(v.begin(), v.end());
    for (double& x : out) x *= s;
    return out;
}

double spectral_radius(const SquareMatrix& m) {
    if (!m.all_finite()) throw DomainError("spectral_radius: non-finite entries");
    const std::size_t n = m.order();

    // Reduce to a nonnegative matrix; rho(-A) = rho(A).
    SquareMatrix a = m;
    if (!a.nonnegative()) {
        a = m * -1.0;
        if (!a.nonnegative()) throw DomainError("spectral_radius: matrix has mixed-sign entries");
    }
    // Shift by I so the Perron root strictly dominates every other eigenvalue in modulus.
    const SquareMatrix shifted = a + SquareMatrix::identity(n);

    constexpr std::size_t kMaxIterations = 20000;
    constexpr double kTol = 1e-12;

    Vector v(n, 1.0 / static_cast<double>(n));
    double previous = -1.0;
    for (std::size_t it = 1; it <= kMaxIterations; ++it) {
        Vector w = shifted.apply(v);
        double sum_w = 0.0;
        for (double x : w) sum_w += x;
        // v sums to one, so sum(w) is the Rayleigh-type estimate 1^T A v / 1^T v.
        const double estimate = sum_w;

        // Collatz-Wielandt bracket when v is strictly positive.
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        bool positive = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] <= 0.0) {
                positive = false;
                break;
            }
            const double r = w[i] / v[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        for (double& x : w) x /= sum_w;
        v = std::move(w);

        if (positive && hi - lo <= kTol * hi) return std::max(0.0, 0.5 * (lo + hi) - 1.0);
        if (previous > 0.0 && std::abs(estimate - previous) <= kTol * estimate) return std::max(0.0, estimate - 1.0);
        previous = estimate;
    }
    // Defective Perron root (Jordan block): fall back to Gelfand's formula on
    // normalized repeated squares, rho = lim ||A^(2^k)||^(1/2^k).
    SquareMatrix b = a;
    double log_scale = 0.0;
    double weight = 1.0;
    for (int k = 0; k < 60; ++k) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) norm = std::max(norm, b(i, j));
        if (norm == 0.0) return 0.0;
        b = b * (1.0 / norm);
        log_scale += weight * std::log(norm);
        b = b * b;
        weight *= 0.5;
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) norm = std::max(norm, b(i, j));
    if (norm == 0.0) return 0.0;
    const double rho = std::exp(log_scale + weight * std::log(norm));
    if (!std::isfinite(rho)) throw NumericalFailure("spectral_radius: power iteration did not converge", kMaxIterations);
    return rho;
}

LuDecomposition::LuDecomposition(const SquareMatrix& m) : n_(m.order()), lu_(m), perm_(m.order()) {
    for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
    for (std::size_t k = 0; k < n_; ++k) {
        std::size_t pivot = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n_; ++i) {
            if (std::abs(lu_(i, k)) > best) {
                best = std::abs(lu_(i, k));
                pivot = i;
            }
        }
        if (best == 0.0) throw DomainError("LU factorization: matrix is singular");
        if (pivot != k) {
            for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(pivot, j));
            std::swap(perm_[k], perm_[pivot]);
        }
        for (std::size_t i = k + 1; i < n_; ++i) {
            const double f = lu_(i, k) / lu_(k, k);
            lu_(i, k) = f;
            for (std::size_t j = k + 1; j < n_; ++j) lu_(i, j) -= f * lu_(k, j);
        }
    }
}

Vector LuDecomposition::solve(std::span<const double> rhs) const {
    if (rhs.size() != n_) throw DomainError("dimension mismatch in LU solve");
    Vector x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = rhs[perm_[i]];
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n_; i-- > 0;) {
        for (std::size_t j = i + 1; j < n_; ++j) x[i] -= lu_(i, j) * x[j];
        x[i] /= lu_(i, i);
    }
    return x;
}

Vector LuDecomposition::solve_transposed(std::span<const double> rhs) const {
    if (rhs.size() != n_) throw DomainError("dimension mismatch in LU solve");
    // P m = L U  =>  m^T = U^T L^T P, so solve U^T y = rhs, L^T z = y, x = P^T z.
    Vector y(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < i; ++j) y[i] -= lu_(j, i) * y[j];
        y[i] /= lu_(i, i);
    }
    for (std::size_t i = n_; i-- > 0;)
        for (std::size_t j = i + 1; j < n_; ++j) y[i] -= lu_(j, i) * y[j];
    Vector x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
    return x;
}

SquareMatrix LuDecomposition::inverse() const {
    SquareMatrix inv(n_);
    Vector e(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        e[j] = 1.0;
        const Vector col = solve(e);
        for (std::size_t i = 0; i < n_; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    return inv;
}

SquareMatrix neumann_inverse(const SquareMatrix& m) {
    const double rho = spectral_radius(m);
    if (!(rho < 1.0)) throw DivergentSeries(1.0, rho);
    return LuDecomposition(SquareMatrix::identity(m.order()) - m).inverse();
}

SquareMatrix mat_power(const SquareMatrix& m, unsigned k) {
    SquareMatrix result = SquareMatrix::identity(m.order());
    SquareMatrix base = m;
    while (k > 0) {
        if (k & 1U) result = result * base;
        k >>= 1U;
        if (k > 0) base = base * base;
    }
    return result;
}

}  // namespace etmc
