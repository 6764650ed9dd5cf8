#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace banknet {

/// Small dense row-major matrix. Everything in this project is n <= a few
/// dozen, so a flat vector plus hand-rolled factorizations beats pulling in
/// a linear algebra dependency.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Solves A x = b with Gaussian elimination and partial pivoting.
/// Throws std::runtime_error on a (numerically) singular system.
std::vector<double> lu_solve(Matrix a, std::vector<double> b);

/// Cholesky-type factorization of a symmetric positive SEMI-definite
/// matrix: returns lower-triangular L with A = L L'. Pivots within
/// `tol` of zero are treated as exactly zero (perfect correlation is
/// legal); a pivot below -tol means the matrix is not PSD and throws.
Matrix cholesky_psd(const Matrix& a, double tol = 1e-10);

}  // namespace banknet
