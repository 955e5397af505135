#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "smp/error.hpp"

namespace smp {

using Complex = std::complex<double>;

/// Dense row-major square-or-rectangular matrix. Sizes here are small (tens of
/// states) so a plain contiguous buffer is all that is needed.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t i, std::size_t j) noexcept {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    const T& operator()(std::size_t i, std::size_t j) const noexcept {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }

    Matrix& operator+=(const Matrix& o) {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    template <typename S>
    Matrix& operator*=(const S& scale) {
        for (auto& v : data_) v *= scale;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    template <typename S>
    friend Matrix operator*(Matrix a, const S& scale) requires(!std::is_same_v<S, Matrix>) {
        return a *= scale;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        assert(a.cols_ == b.rows_);
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;

/// Largest absolute entry.
template <typename T>
double max_abs(const Matrix<T>& m) {
    double out = 0.0;
    for (const auto& v : m.data()) out = std::max(out, static_cast<double>(std::abs(v)));
    return out;
}

/// Solves A·X = B by Gaussian elimination with partial pivoting on complex
/// magnitude. B may have any number of columns (a vector is an n×1 matrix).
/// A pivot smaller than 1e-13 times the largest entry of its original row is
/// treated as singular.
inline ComplexMatrix complex_linear_solve(ComplexMatrix a, ComplexMatrix b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DomainError("complex_linear_solve: matrix is not square");
    if (b.rows() != n) throw DomainError("complex_linear_solve: right-hand side has wrong row count");
    const std::size_t m = b.cols();

    std::vector<double> row_scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) row_scale[i] = std::max(row_scale[i], std::abs(a(i, j)));

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double mag = std::abs(a(r, col));
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (best == 0.0 || best < 1e-13 * row_scale[pivot])
            throw SingularMatrix("complex_linear_solve: singular matrix (pivot " + std::to_string(best) +
                                 " in column " + std::to_string(col) + ")");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(col, j), b(pivot, j));
            std::swap(row_scale[col], row_scale[pivot]);
        }
        const Complex inv = 1.0 / a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const Complex factor = a(r, col) * inv;
            if (factor == Complex{}) continue;
            a(r, col) = Complex{};
            for (std::size_t j = col + 1; j < n; ++j) a(r, j) -= factor * a(col, j);
            for (std::size_t j = 0; j < m; ++j) b(r, j) -= factor * b(col, j);
        }
    }

    for (std::size_t ii = n; ii-- > 0;) {
        const Complex inv = 1.0 / a(ii, ii);
        for (std::size_t j = 0; j < m; ++j) {
            Complex acc = b(ii, j);
            for (std::size_t k = ii + 1; k < n; ++k) acc -= a(ii, k) * b(k, j);
            b(ii, j) = acc * inv;
        }
    }
    return b;
}

} // namespace smp
