#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "gridseer/common/error.hpp"

namespace gridseer {

/// Small dense square-or-rectangular matrix, row-major. Only used for the
/// network-sized systems (N ~ 23), where a plain loop beats any sparse setup.
template <typename T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = DenseMatrix<double>;
using ComplexMatrix = DenseMatrix<std::complex<double>>;

template <typename T>
std::vector<T> matvec(const DenseMatrix<T>& a, std::span<const T> x) {
    std::vector<T> y(a.rows(), T{});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        T acc{};
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

/// In-place Gaussian elimination with partial pivoting; solves A X = B for a
/// right-hand-side matrix B (one column per system). Throws SingularJacobian
/// if the largest available pivot magnitude falls below `pivot_tol`.
template <typename T>
void gauss_solve_inplace(DenseMatrix<T>& a, DenseMatrix<T>& b, double pivot_tol = 1e-12) {
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (!(best >= pivot_tol))
            throw SingularJacobian("pivot " + std::to_string(best) + " below tolerance at column " +
                                   std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(k, j), b(piv, j));
        }
        const T inv = T(1) / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const T f = a(i, k) * inv;
            if (f == T{}) continue;
            a(i, k) = T{};
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < m; ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = 0; j < m; ++j) {
            T acc = b(kk, j);
            for (std::size_t c = kk + 1; c < n; ++c) acc -= a(kk, c) * b(c, j);
            b(kk, j) = acc / a(kk, kk);
        }
    }
}

template <typename T>
std::vector<T> gauss_solve(DenseMatrix<T> a, std::span<const T> rhs, double pivot_tol = 1e-12) {
    DenseMatrix<T> b(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
    gauss_solve_inplace(a, b, pivot_tol);
    std::vector<T> x(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) x[i] = b(i, 0);
    return x;
}

template <typename T>
DenseMatrix<T> invert(DenseMatrix<T> a, double pivot_tol = 1e-12) {
    DenseMatrix<T> id(a.rows(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) id(i, i) = T(1);
    gauss_solve_inplace(a, id, pivot_tol);
    return id;
}

}  // namespace gridseer
